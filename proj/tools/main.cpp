#include "runner.hpp"

int main(int argc, char** argv) { return hyperlq::cli::Main(argc, argv); }
