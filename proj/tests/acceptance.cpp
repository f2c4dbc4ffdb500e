// End-to-end acceptance checks. Standalone binary: one PASS/FAIL line per
// criterion, exit 0 only when every criterion holds. Live criteria run
// against freshly booted deployments with a throwaway PKI; offline criteria
// exercise the codec, proof, and code-window primitives exhaustively.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "support/totp_oracle.hpp"
#include "ztsfc/chain_codec.hpp"
#include "ztsfc/config.hpp"
#include "ztsfc/crypto.hpp"
#include "ztsfc/errors.hpp"
#include "ztsfc/harness.hpp"
#include "ztsfc/pki.hpp"
#include "ztsfc/pot.hpp"
#include "ztsfc/scenarios.hpp"
#include "ztsfc/totp.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ztsfc;
using Clock = std::chrono::steady_clock;
using harness::ClientMaterial;
using harness::RequestSpec;
using harness::Topology;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// name (case-insensitive) -> multiset of values
using HeaderSet = std::map<std::string, std::multiset<std::string>>;

std::string describe(const HeaderSet& h) {
  std::string out;
  for (const auto& [name, values] : h)
    for (const auto& v : values) out += name + "=" + v + " ";
  return out.empty() ? "(none)" : out;
}

// --- criterion 1: the four identity postures take exactly their paths -------

bool run_routing_matrix(Topology& topo, std::string& detail) {
  auto t0 = Clock::now();
  std::vector<scenarios::Result> results;
  results.push_back(scenarios::routing(topo, "trusted", topo.client_full(), {}));
  results.push_back(scenarios::routing(topo, "cert-only", topo.client_cert_only(), {"ips"}));
  results.push_back(scenarios::routing(topo, "managed-only",
                                       topo.with_mfa(topo.client_managed_only()), {"mfa"}));
  results.push_back(scenarios::routing(topo, "untrusted",
                                       topo.with_mfa(topo.client_anonymous()),
                                       {"mfa", "ips"}));
  auto elapsed = seconds_since(t0);

  int ok = 0;
  for (const auto& r : results)
    if (r.pass) ++ok;
  char buf[160];
  if (ok == 4 && elapsed < 10.0) {
    std::snprintf(buf, sizeof buf, "4/4 identity paths match in %.1f s", elapsed);
    detail = buf;
    return true;
  }
  detail = std::to_string(ok) + "/4 paths matched in " + std::to_string(elapsed) + " s";
  for (const auto& r : results)
    if (!r.pass) detail += "; " + r.name + ": " + r.detail;
  return false;
}

// --- criterion 2: the service receives the original request -----------------

bool run_origin_transparency(Topology& topo, std::string& detail) {
  struct Posture {
    std::string name;
    ClientMaterial client;
  };
  std::vector<Posture> postures = {
      {"trusted", topo.client_full()},
      {"cert-only", topo.client_cert_only()},
      {"managed-only", topo.with_mfa(topo.client_managed_only())},
      {"untrusted", topo.with_mfa(topo.client_anonymous())},
  };

  std::mt19937_64 rng(0x7261774d69727273ULL);
  auto hex_string = [&rng](std::size_t n) {
    static const char* kHex = "0123456789abcdef";
    std::string s;
    s.reserve(n);
    for (std::size_t i = 0; i < n; ++i) s += kHex[rng() % 16];
    return s;
  };

  const char* kBodyMethods[] = {"POST", "PUT", "PATCH"};
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const auto& posture = postures[static_cast<std::size_t>(i) % postures.size()];

    RequestSpec spec;
    bool with_body = (i % 10) != 9;  // every tenth request is a bare GET
    spec.method = with_body ? kBodyMethods[i % 3] : "GET";
    spec.target = "/mirror/" + std::to_string(i) + "?q=" + hex_string(8);
    spec.body = with_body ? hex_string(1 + rng() % 2048) : "";
    spec.headers = {
        {"Accept", "application/mirror-" + std::to_string(i)},
        {"User-Agent", "origin-probe/" + std::to_string(i)},
        {"X-Probe-A", hex_string(12)},
        {"X-Probe-B", hex_string(24)},
    };
    if (with_body) spec.headers.emplace_back("Content-Type", "application/probe");

    std::string err;
    auto res = harness::send_through_pep(topo, posture.client, spec, &err);
    if (!res || res->status != 200) {
      detail = "request " + std::to_string(i) + " (" + posture.name + ") got " +
               (res ? "status " + std::to_string(res->status) : "no response: " + err);
      return false;
    }

    auto echoed = nlohmann::json::parse(res->body, nullptr, false);
    if (echoed.is_discarded()) {
      detail = "request " + std::to_string(i) + ": service reflection unparseable";
      return false;
    }
    if (echoed.value("method", "") != spec.method ||
        echoed.value("target", "") != spec.target) {
      detail = "request " + std::to_string(i) + ": method/target arrived as " +
               echoed.value("method", "?") + " " + echoed.value("target", "?") +
               ", sent " + spec.method + " " + spec.target;
      return false;
    }
    auto expected_body = crypto::b64url_encode(crypto::as_bytes(spec.body));
    if (echoed.value("body_b64", "") != expected_body) {
      detail = "request " + std::to_string(i) + ": body changed in transit";
      return false;
    }

    HeaderSet sent;
    for (const auto& [name, value] : spec.headers) sent[lower(name)].insert(value);
    HeaderSet received;
    auto echoed_headers = echoed.value("headers", nlohmann::json::object());
    for (const auto& [name, values] : echoed_headers.items()) {
      if (chain::is_internal_header(name)) continue;
      for (const auto& v : values) received[lower(name)].insert(v.get<std::string>());
    }
    if (sent != received) {
      detail = "request " + std::to_string(i) + " (" + posture.name +
               "): headers diverged; sent " + describe(sent) + "| received " +
               describe(received);
      return false;
    }
    ++checked;
  }
  detail = std::to_string(checked) + "/100 randomized requests arrived byte-identical";
  return checked == 100;
}

// --- criterion 3: interior components refuse direct dials -------------------

bool run_segmentation(Topology& topo, std::string& detail) {
  auto results = scenarios::segmentation(topo);
  int ok = 0;
  for (const auto& r : results)
    if (r.pass) ++ok;
  if (ok == static_cast<int>(results.size()) && ok == 3) {
    detail = "3/3 direct dials died in the handshake with zero HTTP bytes";
    return true;
  }
  detail = std::to_string(ok) + "/" + std::to_string(results.size()) + " dials rejected";
  for (const auto& r : results)
    if (!r.pass) detail += "; " + r.name + ": " + r.detail;
  return false;
}

// --- criterion 4: drops surface as 403 plus correlated feedback -------------

bool run_drop_feedback(Topology& topo, std::string& detail) {
  auto ips = scenarios::ips_drop(topo);
  auto mfa = scenarios::mfa_wrong_code(topo);
  if (ips.pass && mfa.pass) {
    detail = "ips rule and wrong one-time code both yield 403 with matching feedback";
    return true;
  }
  detail = "";
  if (!ips.pass) detail += "ips-drop: " + ips.detail;
  if (!mfa.pass) detail += std::string(detail.empty() ? "" : "; ") +
                           "mfa-wrong-code: " + mfa.detail;
  return false;
}

// --- criterion 5: every single transit-proof mutation is rejected -----------

bool run_pot_soundness(std::string& detail) {
  auto verifier = crypto::generate_p256_key();
  const std::vector<FunctionId> kAllFns = {"ips", "mfa", "waf"};
  auto now = static_cast<std::int64_t>(std::time(nullptr));

  std::size_t mutations = 0, wrongly_accepted = 0, intact = 0, intact_ok = 0;
  std::string first_miss;

  auto expect_fail = [&](const std::vector<std::string>& tokens,
                         const std::vector<FunctionId>& planned,
                         const crypto::Bytes& rid, const crypto::Bytes& digest,
                         const std::string& what) {
    ++mutations;
    if (pot::verify(tokens, planned, rid, digest, verifier.get()).ok) {
      ++wrongly_accepted;
      if (first_miss.empty()) first_miss = what;
    }
  };

  for (std::size_t n = 1; n <= 3; ++n) {
    std::vector<FunctionId> planned(kAllFns.begin(), kAllFns.begin() + n);
    auto rid = crypto::random_bytes(pot::kRequestIdLen);
    auto digest = canonical_request_digest("POST", "/pot/" + std::to_string(n), "body");
    auto rid2 = crypto::random_bytes(pot::kRequestIdLen);
    auto digest2 = canonical_request_digest("POST", "/other", "other body");

    std::vector<std::string> tokens, foreign;
    for (const auto& fn : planned) {
      tokens.push_back(pot::make_token(rid, fn, digest, verifier.get(), now));
      foreign.push_back(pot::make_token(rid2, fn, digest2, verifier.get(), now));
    }

    ++intact;
    if (pot::verify(tokens, planned, rid, digest, verifier.get()).ok) ++intact_ok;

    std::string tag = "chain length " + std::to_string(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto removed = tokens;
      removed.erase(removed.begin() + static_cast<std::ptrdiff_t>(i));
      expect_fail(removed, planned, rid, digest,
                  tag + ": token " + std::to_string(i) + " removed");

      auto duplicated = tokens;
      duplicated.push_back(tokens[i]);
      expect_fail(duplicated, planned, rid, digest,
                  tag + ": token " + std::to_string(i) + " duplicated");

      auto substituted = tokens;
      substituted[i] = foreign[i];
      expect_fail(substituted, planned, rid, digest,
                  tag + ": token " + std::to_string(i) + " swapped for another request's");

      auto blob = crypto::b64url_decode(tokens[i]);
      if (!blob) {
        detail = tag + ": token " + std::to_string(i) + " is not base64url";
        return false;
      }
      for (std::size_t j = 0; j < blob->size(); ++j) {
        auto flipped_blob = *blob;
        flipped_blob[j] ^= 0x01;
        auto flipped = tokens;
        flipped[i] = crypto::b64url_encode(flipped_blob);
        expect_fail(flipped, planned, rid, digest,
                    tag + ": token " + std::to_string(i) + " byte " +
                        std::to_string(j) + " flipped");
      }
    }
  }

  if (wrongly_accepted == 0 && intact_ok == intact) {
    detail = std::to_string(mutations) + " single mutations all rejected, " +
             std::to_string(intact) + "/" + std::to_string(intact) +
             " intact chains verified";
    return true;
  }
  detail = std::to_string(wrongly_accepted) + "/" + std::to_string(mutations) +
           " mutations accepted, " + std::to_string(intact_ok) + "/" +
           std::to_string(intact) + " intact chains verified";
  if (!first_miss.empty()) detail += "; first miss: " + first_miss;
  return false;
}

// --- criterion 6: chain encoding round-trips; sealed entries stay private ---

bool run_codec_properties(std::string& detail) {
  std::mt19937_64 rng(0x636861696e730ULL);
  std::size_t roundtrips = 0;
  for (int t = 0; t < 1000; ++t) {
    std::size_t n = 1 + rng() % 16;
    std::vector<std::string> hops;
    for (std::size_t i = 0; i < n; ++i)
      hops.push_back("h" + std::to_string(t) + "-" + std::to_string(i) + ".lan:" +
                     std::to_string(1 + rng() % 65535));

    auto encoded = chain::encode_chain(hops);
    if (!encoded) {
      detail = "chain " + std::to_string(t) + " did not encode";
      return false;
    }
    std::optional<std::string> value = *encoded;
    for (std::size_t i = 0; i < n; ++i) {
      if (!value) {
        detail = "chain " + std::to_string(t) + " lost entries after hop " +
                 std::to_string(i);
        return false;
      }
      auto popped = chain::pop_next_hop(*value);
      if (popped.next != hops[i]) {
        detail = "chain " + std::to_string(t) + " hop " + std::to_string(i) +
                 " popped as " + popped.next + ", wanted " + hops[i];
        return false;
      }
      value = popped.remaining;
    }
    if (value) {
      detail = "chain " + std::to_string(t) + " left residue after the last hop";
      return false;
    }
    ++roundtrips;
  }

  const std::vector<FunctionId> readers = {"alpha", "beta", "gamma"};
  std::size_t pairs = 0;
  for (int t = 0; t < 100; ++t) {
    std::map<FunctionId, crypto::PkeyPtr> keys;
    std::map<FunctionId, EVP_PKEY*> pub;
    std::vector<chain::SealSpec> specs;
    std::vector<std::string> payloads;
    for (const auto& fn : readers) {
      keys[fn] = crypto::generate_p256_key();
      pub[fn] = keys[fn].get();
      auto addr = "next-" + fn + "-" + std::to_string(t) + ".lan:" +
                  std::to_string(1 + rng() % 65535);
      specs.push_back({fn, addr});
      payloads.push_back(addr);
    }
    auto sealed = chain::seal_chain(specs, pub);
    auto entries = chain::parse_sealed_chain(sealed);
    if (entries.size() != readers.size()) {
      detail = "sealed chain " + std::to_string(t) + " parsed to " +
               std::to_string(entries.size()) + " entries";
      return false;
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
      for (std::size_t j = 0; j < readers.size(); ++j) {
        auto opened = chain::open_entry(entries[i], keys[readers[j]].get());
        bool should_open = (i == j);
        if (opened.has_value() != should_open ||
            (should_open && *opened != payloads[i])) {
          detail = "sealed chain " + std::to_string(t) + ": entry for " +
                   entries[i].recipient + (opened ? " opened under " : " stayed closed to ") +
                   readers[j];
          return false;
        }
        ++pairs;
      }
    }
  }

  detail = std::to_string(roundtrips) + "/1000 chains round-tripped, " +
           std::to_string(pairs) + " sealed reader pairs behaved";
  return true;
}

// --- criterion 7: trusted traffic skips the expensive function --------------

bool run_latency_advantage(const config::TopologyConfig& base, std::string& detail) {
  auto result = scenarios::latency_advantage(base);
  detail = result.detail;
  return result.pass;
}

// --- criterion 8: exactly the codes of steps -1, 0, +1 are accepted ---------

bool run_code_window(std::string& detail) {
  const std::vector<std::uint8_t> secret = {'1', '2', '3', '4', '5', '6', '7', '8', '9',
                                            '0', '1', '2', '3', '4', '5', '6', '7', '8',
                                            '9', '0'};
  const std::int64_t when = 1723600000;

  std::set<std::string> expected;
  for (int step = -1; step <= 1; ++step)
    expected.insert(test_oracle::totp_code(secret, when + 30 * step, 30, 6));

  std::size_t accepted = 0, mismatches = 0;
  std::string first_miss;
  char code[8];
  for (int candidate = 0; candidate < 1000000; ++candidate) {
    std::snprintf(code, sizeof code, "%06d", candidate);
    bool ok = totp::verify_window(secret, code, when);
    if (ok) ++accepted;
    if (ok != (expected.count(code) > 0)) {
      ++mismatches;
      if (first_miss.empty())
        first_miss = std::string(code) + (ok ? " accepted" : " rejected") + " wrongly";
    }
  }

  if (mismatches == 0 && accepted == expected.size()) {
    detail = "1000000 codes enumerated, exactly " + std::to_string(accepted) +
             " accepted (steps -1, 0, +1 per the independent oracle)";
    return true;
  }
  detail = std::to_string(mismatches) + " disagreements with the oracle, " +
           std::to_string(accepted) + " accepted";
  if (!first_miss.empty()) detail += "; first: " + first_miss;
  return false;
}

// --- criterion 9: concurrent mixed traffic stays isolated -------------------

bool run_concurrent_isolation(Topology& topo, std::string& detail) {
  auto result = scenarios::soak(topo, 100);
  detail = result.detail;
  return result.pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::string config_path = "configs/topology.toml";
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];

  config::TopologyConfig base;
  std::string pki_tmp;
  try {
    base = config::load_topology_file(config_path);
    pki_tmp = (fs::temp_directory_path() /
               ("ztsfc-accept-pki-" + crypto::hex_encode(crypto::random_bytes(4))))
                  .string();
    pki::generate_deployment(pki_tmp, true);
    base.pki_dir = pki_tmp;
  } catch (const Error& e) {
    std::fprintf(stderr, "acceptance setup failed: %s\n", e.what());
    return 1;
  }

  struct Criterion {
    const char* name;
    bool needs_topology;
    bool (*offline)(std::string&);
    bool (*online)(Topology&, std::string&);
    bool (*config_based)(const config::TopologyConfig&, std::string&);
  };
  const Criterion criteria[] = {
      {"routing-matrix", true, nullptr, run_routing_matrix, nullptr},
      {"origin-transparency", true, nullptr, run_origin_transparency, nullptr},
      {"micro-segmentation", true, nullptr, run_segmentation, nullptr},
      {"drop-feedback", true, nullptr, run_drop_feedback, nullptr},
      {"transit-proof-soundness", false, run_pot_soundness, nullptr, nullptr},
      {"codec-properties", false, run_codec_properties, nullptr, nullptr},
      {"latency-advantage", false, nullptr, nullptr, run_latency_advantage},
      {"code-window", false, run_code_window, nullptr, nullptr},
      {"concurrent-isolation", true, nullptr, run_concurrent_isolation, nullptr},
  };

  int failures = 0;
  try {
    std::optional<Topology> topo;
    topo.emplace(Topology::boot(base));

    int index = 0;
    for (const auto& c : criteria) {
      ++index;
      std::string detail;
      bool pass = false;
      try {
        if (c.offline) pass = c.offline(detail);
        else if (c.online) pass = c.online(*topo, detail);
        else pass = c.config_based(base, detail);
      } catch (const std::exception& e) {
        detail = std::string("aborted: ") + e.what();
      }
      if (!pass) ++failures;
      std::printf("%s %d %-24s %s\n", pass ? "PASS" : "FAIL", index, c.name,
                  detail.c_str());
      std::fflush(stdout);
    }
    topo->teardown();
  } catch (const Error& e) {
    std::fprintf(stderr, "acceptance deployment failed: %s\n", e.what());
    failures = static_cast<int>(std::size(criteria));
  }

  std::error_code ec;
  fs::remove_all(pki_tmp, ec);

  std::printf("%zu/%zu criteria satisfied\n",
              std::size(criteria) - static_cast<std::size_t>(failures),
              std::size(criteria));
  return failures == 0 ? 0 : 1;
}
