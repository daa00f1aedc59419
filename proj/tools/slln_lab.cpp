#include "slln/cli.hpp"

int main(int argc, char** argv) { return slln::cli::parse_and_dispatch(argc, argv); }
