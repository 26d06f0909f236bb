#include "jfbvo/cli.hpp"

int main(int argc, char** argv) { return jfbvo::cli::main_entry(argc, argv); }
