#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "ztsfc/crypto.hpp"

namespace ztsfc {

// Managed-device inventory: per-device assertion secret and managed flag.
// File format: one record per line, `device_id, secret_hex, managed`.
class DeviceInventory {
 public:
  struct Record {
    crypto::Bytes secret;
    bool managed = false;
  };

  static DeviceInventory load_file(const std::string& path);
  static DeviceInventory parse(std::string_view text, const std::string& origin);

  void add(const std::string& device_id, crypto::Bytes secret, bool managed);

  const Record* find(const std::string& device_id) const;

  // True iff mac == HMAC-SHA256(secret, device_id || channel_binding).
  bool verify_assertion(const std::string& device_id, std::span<const std::uint8_t> mac,
                        std::string_view channel_binding) const;

  // Assertion header value a client builds for its connection.
  static std::string make_assertion(const std::string& device_id,
                                    std::span<const std::uint8_t> secret,
                                    std::string_view channel_binding);

  std::size_t size() const { return records_.size(); }

 private:
  std::map<std::string, Record> records_;
};

// Splits "device-id:hexmac"; empty optional when malformed.
std::optional<std::pair<std::string, crypto::Bytes>> parse_device_assertion(std::string_view value);

}  // namespace ztsfc
