#include <iostream>
#include <string>
#include <vector>

#include "vad/app.hpp"

int main(int argc, char** argv) {
  return vad::app::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
