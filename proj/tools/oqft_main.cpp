#include "oqft/cli.hpp"

int main(int argc, char** argv) { return oqft::cli::run_main(argc, argv); }
