#include "bntl/cli.hpp"

int main(int argc, char** argv) { return bntl::cli::run(argc, argv); }
