#include "windreg/cli.hpp"

int main(int argc, char** argv) { return windreg::cli::run(argc, argv); }
