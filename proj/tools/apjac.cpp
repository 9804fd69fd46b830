#include "apjac/cli.hpp"

int main(int argc, char** argv) { return apjac::cli::run(argc, argv); }
