#include "ztsfc/inventory.hpp"

#include <fstream>
#include <sstream>

#include "ztsfc/errors.hpp"

namespace ztsfc {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

crypto::Bytes assertion_message(const std::string& device_id, std::string_view channel_binding) {
  crypto::Bytes msg(device_id.begin(), device_id.end());
  msg.insert(msg.end(), channel_binding.begin(), channel_binding.end());
  return msg;
}

}  // namespace

DeviceInventory DeviceInventory::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open inventory: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

DeviceInventory DeviceInventory::parse(std::string_view text, const std::string& origin) {
  DeviceInventory inv;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;

    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected `device_id, secret_hex, managed`");
    }
    std::string id = trim(line.substr(0, c1));
    std::string secret_hex = trim(line.substr(c1 + 1, c2 - c1 - 1));
    std::string managed_s = trim(line.substr(c2 + 1));

    auto secret = crypto::hex_decode(secret_hex);
    if (id.empty() || !secret || secret->empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": bad device record");
    }
    bool managed;
    if (managed_s == "true") {
      managed = true;
    } else if (managed_s == "false") {
      managed = false;
    } else {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": managed must be true/false");
    }
    inv.add(id, std::move(*secret), managed);
  }
  return inv;
}

void DeviceInventory::add(const std::string& device_id, crypto::Bytes secret, bool managed) {
  records_[device_id] = Record{std::move(secret), managed};
}

const DeviceInventory::Record* DeviceInventory::find(const std::string& device_id) const {
  auto it = records_.find(device_id);
  return it == records_.end() ? nullptr : &it->second;
}

bool DeviceInventory::verify_assertion(const std::string& device_id,
                                       std::span<const std::uint8_t> mac,
                                       std::string_view channel_binding) const {
  const Record* rec = find(device_id);
  if (!rec) return false;
  crypto::Bytes expect = crypto::hmac_sha256(rec->secret, assertion_message(device_id, channel_binding));
  return crypto::ct_equal(expect, mac);
}

std::string DeviceInventory::make_assertion(const std::string& device_id,
                                            std::span<const std::uint8_t> secret,
                                            std::string_view channel_binding) {
  crypto::Bytes mac = crypto::hmac_sha256(secret, assertion_message(device_id, channel_binding));
  return device_id + ":" + crypto::hex_encode(mac);
}

std::optional<std::pair<std::string, crypto::Bytes>> parse_device_assertion(std::string_view value) {
  std::size_t colon = value.rfind(':');
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  std::string id(value.substr(0, colon));
  auto mac = crypto::hex_decode(value.substr(colon + 1));
  if (!mac || mac->empty()) return std::nullopt;
  return std::make_pair(std::move(id), std::move(*mac));
}

}  // namespace ztsfc
