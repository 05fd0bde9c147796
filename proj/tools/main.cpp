#include "cli.hpp"

int main(int argc, char** argv) { return av2t::cli::run(argc, argv); }
