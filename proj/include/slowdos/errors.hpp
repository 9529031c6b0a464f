#pragma once

#include <stdexcept>
#include <string>

namespace slowdos {

/// Malformed input file (bad pcap header, truncated record, bad JSON).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that parses fine but cannot be used (no attackers, IP collision,
/// undefined balanced accuracy, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid scheme / profile / simulation configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slowdos
