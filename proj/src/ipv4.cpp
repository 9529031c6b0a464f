#include "slowdos/ipv4.hpp"

#include <charconv>

#include "slowdos/errors.hpp"

namespace slowdos {

namespace {

bool parse_uint(std::string_view text, unsigned max, unsigned& out) {
  if (text.empty() || text.size() > 3) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end && out <= max;
}

}  // namespace

Ipv4 Ipv4::parse(std::string_view text) {
  std::uint32_t value = 0;
  std::string_view rest = text;
  for (int i = 0; i < 4; ++i) {
    const auto dot = rest.find('.');
    const bool last = i == 3;
    if (last != (dot == std::string_view::npos)) {
      throw FormatError("invalid IPv4 address: '" + std::string(text) + "'");
    }
    unsigned octet = 0;
    if (!parse_uint(rest.substr(0, dot), 255, octet)) {
      throw FormatError("invalid IPv4 address: '" + std::string(text) + "'");
    }
    value = (value << 8) | octet;
    if (!last) rest.remove_prefix(dot + 1);
  }
  return Ipv4(value);
}

std::string Ipv4::str() const {
  return std::to_string(value >> 24) + '.' + std::to_string((value >> 16) & 0xff) + '.' +
         std::to_string((value >> 8) & 0xff) + '.' + std::to_string(value & 0xff);
}

Cidr Cidr::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    throw FormatError("invalid CIDR (missing '/'): '" + std::string(text) + "'");
  }
  unsigned len = 0;
  if (!parse_uint(text.substr(slash + 1), 32, len)) {
    throw FormatError("invalid CIDR prefix length: '" + std::string(text) + "'");
  }
  Cidr c{Ipv4::parse(text.substr(0, slash)), static_cast<int>(len)};
  c.network.value &= c.mask();
  return c;
}

std::string Cidr::str() const { return network.str() + '/' + std::to_string(prefix_len); }

}  // namespace slowdos
