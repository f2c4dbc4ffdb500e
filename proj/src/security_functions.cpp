#include "ztsfc/security_functions.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "ztsfc/errors.hpp"
#include "ztsfc/totp.hpp"

namespace ztsfc::sf {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool contains_or_matches(const std::string& haystack, bool is_regex,
                         const std::string& literal, const std::regex& pattern) {
  if (is_regex) return std::regex_search(haystack, pattern);
  return haystack.find(literal) != std::string::npos;
}

}  // namespace

Verdict Verdict::pass(std::vector<std::string> scrub) {
  Verdict v;
  v.kind = Kind::Pass;
  v.scrub_headers = std::move(scrub);
  return v;
}

Verdict Verdict::drop(std::string reason) {
  Verdict v;
  v.kind = Kind::Drop;
  v.reason = std::move(reason);
  return v;
}

Verdict Verdict::challenge() {
  Verdict v;
  v.kind = Kind::Challenge;
  return v;
}

IpsRuleset IpsRuleset::load_file(const std::string& path) {
  return parse(read_file(path), path);
}

IpsRuleset IpsRuleset::parse(std::string_view text, const std::string& origin) {
  IpsRuleset set;
  std::set<std::string> ids;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    auto where = [&] { return origin + ":" + std::to_string(line_no) + ": "; };
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t1 == std::string_view::npos || t2 == std::string_view::npos)
      throw ConfigError(where() + "expected id<TAB>scope<TAB>pattern");

    Rule rule;
    rule.id = std::string(line.substr(0, t1));
    std::string scope(line.substr(t1 + 1, t2 - t1 - 1));
    std::string pattern(line.substr(t2 + 1));
    if (rule.id.empty()) throw ConfigError(where() + "empty rule id");
    if (pattern.empty()) throw ConfigError(where() + "empty pattern");
    if (!ids.insert(rule.id).second)
      throw ConfigError(where() + "duplicate rule id '" + rule.id + "'");

    if (scope == "request-line") rule.scope = Scope::RequestLine;
    else if (scope == "headers") rule.scope = Scope::HeaderFields;
    else if (scope == "body") rule.scope = Scope::Body;
    else throw ConfigError(where() + "unknown scope '" + scope + "'");

    if (pattern.rfind("re:", 0) == 0) {
      rule.is_regex = true;
      try {
        // Signatures match case-insensitively; attackers vary case for free.
        rule.pattern = std::regex(pattern.substr(3), std::regex::icase);
      } catch (const std::regex_error& e) {
        throw ConfigError(where() + "bad regex in rule '" + rule.id + "': " + e.what());
      }
    } else {
      rule.literal = pattern;
    }
    set.rules_.push_back(std::move(rule));
  }
  return set;
}

Verdict IpsRuleset::inspect(const RequestView& request) const {
  if (request.body.size() > kMaxInspectedBody)
    return Verdict::drop("oversize-body");

  std::string request_line = request.method + " " + request.target;
  std::string body(request.body);

  for (const auto& rule : rules_) {
    bool hit = false;
    switch (rule.scope) {
      case Scope::RequestLine:
        hit = contains_or_matches(request_line, rule.is_regex, rule.literal, rule.pattern);
        break;
      case Scope::HeaderFields:
        if (request.headers) {
          for (const auto& [name, value] : *request.headers) {
            if (contains_or_matches(name + ": " + value, rule.is_regex, rule.literal,
                                    rule.pattern)) {
              hit = true;
              break;
            }
          }
        }
        break;
      case Scope::Body:
        hit = contains_or_matches(body, rule.is_regex, rule.literal, rule.pattern);
        break;
    }
    if (hit) return Verdict::drop("rule:" + rule.id);
  }
  return Verdict::pass();
}

MfaUserStore MfaUserStore::load_file(const std::string& path) {
  return parse(read_file(path), path);
}

MfaUserStore MfaUserStore::parse(std::string_view text, const std::string& origin) {
  MfaUserStore store;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;

    auto where = [&] { return origin + ":" + std::to_string(line_no) + ": "; };
    std::size_t comma = trimmed.find(',');
    if (comma == std::string::npos)
      throw ConfigError(where() + "expected `user, base32_secret`");
    std::string user = trim(trimmed.substr(0, comma));
    std::string secret_b32 = trim(trimmed.substr(comma + 1));
    if (user.empty()) throw ConfigError(where() + "empty user");

    auto secret = totp::base32_decode(secret_b32);
    if (!secret) throw ConfigError(where() + "secret for '" + user + "' is not base32");
    if (secret->size() < 16)
      throw ConfigError(where() + "secret for '" + user + "' is shorter than 128 bits");
    if (store.users_.count(user))
      throw ConfigError(where() + "duplicate user '" + user + "'");
    store.users_.emplace(std::move(user), std::move(*secret));
  }
  return store;
}

void MfaUserStore::add(const std::string& user, crypto::Bytes secret) {
  users_[user] = std::move(secret);
}

const crypto::Bytes* MfaUserStore::find(const std::string& user) const {
  auto it = users_.find(user);
  return it == users_.end() ? nullptr : &it->second;
}

std::vector<std::string> MfaUserStore::users() const {
  std::vector<std::string> names;
  for (const auto& [user, _] : users_) names.push_back(user);
  return names;
}

Verdict mfa_verify(const RequestView& request, const MfaUserStore& users,
                   std::int64_t now) {
  if (!request.headers) return Verdict::challenge();
  auto user = get_header(*request.headers, kMfaUserHeader);
  auto code = get_header(*request.headers, kMfaCodeHeader);
  if (!user || !code) return Verdict::challenge();

  const auto* secret = users.find(*user);
  if (!secret) return Verdict::drop("mfa-unknown-user");
  if (!totp::verify_window(*secret, *code, now)) return Verdict::drop("mfa-failed");
  return Verdict::pass({kMfaUserHeader, kMfaCodeHeader});
}

Verdict pass_through(const RequestView&) { return Verdict::pass(); }

}  // namespace ztsfc::sf
