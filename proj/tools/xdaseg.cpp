#include "xda/cli.hpp"

int main(int argc, char** argv) { return xda::cli::run(argc, argv); }
