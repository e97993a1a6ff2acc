#include "nonwoven/cli.hpp"

int main(int argc, char** argv) { return nonwoven::cli::run(argc, argv); }
