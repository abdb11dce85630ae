#include "scif/cli.hpp"

int main(int argc, char** argv) { return scif::cli::run(argc, argv); }
