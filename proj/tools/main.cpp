#include <iostream>

#include "seqchan/app.hpp"

int main(int argc, char** argv) {
  return seqchan::app::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
