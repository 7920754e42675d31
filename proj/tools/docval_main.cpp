#include "docval/cli.hpp"

#include <iostream>

int main(int argc, char ** argv) {
    return docval::run_cli(argc, argv, std::cout, std::cerr);
}
