#include "singlim/cli.hpp"

int main(int argc, char** argv) { return singlim::cli::run(argc, argv); }
