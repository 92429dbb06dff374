#include "cli.hpp"

int main(int argc, char** argv) { return nematic::cli::run(argc, argv); }
