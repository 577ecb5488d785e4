#include "rbcmarl/cli.hpp"

int main(int argc, char** argv) { return rbcmarl::cli_dispatch(argc, argv); }
