#include "mcle/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return mcle::cli::run(argc, argv, std::cout, std::cerr);
}
