#include "gscan/cli.hpp"

int main(int argc, char** argv) { return gscan::cli::run(argc, argv); }
