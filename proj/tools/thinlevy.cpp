#include <iostream>

#include "thinlevy/cli.hpp"

int main(int argc, char** argv) {
    return thinlevy::cli::run_cli(argc, argv, std::cout, std::cerr);
}
