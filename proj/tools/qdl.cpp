#include "qdl/cli.hpp"

int main(int argc, char** argv) { return qdl::dispatch(argc, argv); }
