#include "symvqe/cli.hpp"

int main(int argc, char** argv) { return symvqe::cli_main(argc, argv); }
