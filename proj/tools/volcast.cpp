#include "volcast/cli.hpp"

int main(int argc, char** argv) { return volcast::run(argc, argv); }
