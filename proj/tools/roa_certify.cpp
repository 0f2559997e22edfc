#include "roa/cli.hpp"

int main(int argc, char** argv) { return roa::cli::run(argc, argv); }
