#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return lpcasrc::cli::run(argc, argv, std::cout, std::cerr);
}
