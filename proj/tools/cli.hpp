#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace lpi::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kNumericalAbort = 3,
  kMetricPrecondition = 4,
};

using KeyValues = std::map<std::string, std::string>;

/// Every key accepted by a config file, each also exposed as --key.
const std::vector<std::string>& config_keys();
/// Built-in defaults and the named profile overrides ("full" is empty).
KeyValues default_settings();
KeyValues profile_settings(const std::string& name);

/// TOML-style "key = value" lines; '#' starts a comment; values may be quoted.
/// Underscores in keys are read as dashes. Unknown keys throw InvalidArgument.
KeyValues parse_config(std::istream& in);

/// defaults < profile < file < flags. The profile is taken from flags, then the file.
KeyValues resolve_settings(const KeyValues& file, const KeyValues& flags);

/// Runs one command line and returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lpi::cli
