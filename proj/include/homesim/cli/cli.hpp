#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace homesim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;  // bad flags, configs, versions, rejected artifacts
inline constexpr int kExitIntegrity = 2;
inline constexpr int kExitInternal = 3;

/// Name of the per-run manifest written next to every archive the CLI produces.
inline constexpr std::string_view kRunManifestFile = "run_manifest.json";
/// Resolved parameters, written next to every archive the CLI produces.
inline constexpr std::string_view kParametersFile = "parameters.json";

/// Runs one command. `args` excludes the program name. Errors are reported on
/// `err` and mapped to the exit codes above; nothing is thrown.
int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv);

}  // namespace homesim::cli
