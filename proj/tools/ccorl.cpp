#include "ccorl/cli.hpp"

int main(int argc, char** argv) { return ccorl::cli::run(argc, argv); }
