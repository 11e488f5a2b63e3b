#include "commands.hpp"

int main(int argc, char** argv) { return cvmcov::cli::run(argc, argv); }
