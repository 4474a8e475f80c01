#pragma once

namespace gpmass {

// Full command-line front end (subcommand dispatch, config loading, output
// writing). Returns the process exit code; never throws.
int cli_main(int argc, char** argv);

}  // namespace gpmass
