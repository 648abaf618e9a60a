#include "cptlab/cli.hpp"

int main(int argc, char** argv) { return cptlab::cli::main(argc, argv); }
