#include "specclip/harness.hpp"

int main(int argc, char** argv) { return specclip::run_cli(argc, argv); }
