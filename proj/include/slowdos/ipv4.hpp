#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace slowdos {

/// IPv4 address in host byte order.
struct Ipv4 {
  std::uint32_t value = 0;

  constexpr Ipv4() = default;
  constexpr explicit Ipv4(std::uint32_t v) : value(v) {}
  constexpr Ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
      : value((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) |
              (std::uint32_t{c} << 8) | std::uint32_t{d}) {}

  /// Parses dotted-quad notation; throws FormatError on anything else.
  static Ipv4 parse(std::string_view text);
  std::string str() const;

  friend constexpr auto operator<=>(Ipv4, Ipv4) = default;
};

/// An IPv4 prefix such as 128.10.0.0/16.
struct Cidr {
  Ipv4 network;
  int prefix_len = 32;

  static Cidr parse(std::string_view text);
  std::string str() const;

  std::uint32_t mask() const {
    return prefix_len == 0 ? 0u : ~std::uint32_t{0} << (32 - prefix_len);
  }
  bool contains(Ipv4 ip) const {
    return (ip.value & mask()) == (network.value & mask());
  }
  /// Number of addresses in the block (2^(32-prefix_len)).
  std::uint64_t size() const { return std::uint64_t{1} << (32 - prefix_len); }

  friend constexpr bool operator==(const Cidr&, const Cidr&) = default;
};

struct Ipv4Hash {
  std::size_t operator()(Ipv4 ip) const noexcept { return ip.value; }
};

}  // namespace slowdos
