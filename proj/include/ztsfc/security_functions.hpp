#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "ztsfc/crypto.hpp"
#include "ztsfc/http_common.hpp"

namespace ztsfc::sf {

// The slice of a request a security function gets to inspect. Functions never
// see TLS internals or chain headers; the node strips those first.
struct RequestView {
  std::string method;
  std::string target;
  const Headers* headers = nullptr;
  std::string_view body;
};

struct Verdict {
  enum class Kind { Pass, Drop, Challenge };
  Kind kind = Kind::Pass;
  std::string reason;                      // Drop only; reported back to the PEP
  std::vector<std::string> scrub_headers;  // Pass only; consumed by this hop

  bool passed() const { return kind == Kind::Pass; }

  static Verdict pass(std::vector<std::string> scrub = {});
  static Verdict drop(std::string reason);
  static Verdict challenge();
};

// --- signature IPS ------------------------------------------------------------

// Rule file: one rule per line, `id<TAB>scope<TAB>pattern`, scope one of
// request-line | headers | body. Patterns starting with `re:` are
// case-insensitive regular expressions, anything else is a case-sensitive
// literal substring.
class IpsRuleset {
 public:
  static IpsRuleset load_file(const std::string& path);
  static IpsRuleset parse(std::string_view text, const std::string& origin);

  // First matching rule wins. Bodies beyond the inspection limit are dropped
  // outright: what cannot be inspected cannot be vouched for.
  Verdict inspect(const RequestView& request) const;

  std::size_t size() const { return rules_.size(); }

 private:
  enum class Scope { RequestLine, HeaderFields, Body };
  struct Rule {
    std::string id;
    Scope scope;
    bool is_regex = false;
    std::string literal;
    std::regex pattern;
  };
  std::vector<Rule> rules_;
};

inline constexpr std::size_t kMaxInspectedBody = 1 << 20;  // 1 MiB

// --- one-time-password MFA ------------------------------------------------------

inline constexpr const char* kMfaUserHeader = "X-MFA-User";
inline constexpr const char* kMfaCodeHeader = "X-MFA-Code";

// User store: `user, base32_secret` per line; secrets must decode to at least
// 16 bytes.
class MfaUserStore {
 public:
  static MfaUserStore load_file(const std::string& path);
  static MfaUserStore parse(std::string_view text, const std::string& origin);

  void add(const std::string& user, crypto::Bytes secret);
  const crypto::Bytes* find(const std::string& user) const;
  std::vector<std::string> users() const;
  std::size_t size() const { return users_.size(); }

 private:
  std::map<std::string, crypto::Bytes> users_;
};

// Missing credentials challenge the client; wrong ones drop the request.
// A pass scrubs the credential headers: they were for this hop only.
Verdict mfa_verify(const RequestView& request, const MfaUserStore& users,
                   std::int64_t now);

// --- inert reference function ----------------------------------------------------

Verdict pass_through(const RequestView& request);

}  // namespace ztsfc::sf
