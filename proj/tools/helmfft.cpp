#include <iostream>

#include "helmfft/cli.hpp"

int main(int argc, char **argv)
{
  return helmfft::cli::main_entry(argc, argv, std::cout, std::cerr);
}
