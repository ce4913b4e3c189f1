#include "doctest.h"

#include <set>
#include <thread>

#include "acdroute/admission.hpp"

using namespace acdroute;

namespace {

const Timestamp kNow = parse_timestamp("2009-10-21 17:13:06");
const VendorId kA{55};
const VendorId kB{62};

std::string id(int i) { return "call-" + std::to_string(i); }

}  // namespace

TEST_CASE("cold start accepts everything") {
  AdmissionState st({});
  for (int i = 0; i < 1000; ++i) CHECK_FALSE(st.admit(id(i), kA, kNow).rejected());
  CHECK(st.counters().received[0] == 1000);
  CHECK(st.counters().rejected[0] == 0);
}

TEST_CASE("a vendor with a zero target is never refused") {
  AdmissionState st({});
  st.set_targets({12.77, 0.0});
  for (int i = 0; i < 10000; ++i) CHECK_FALSE(st.decide(id(i), kB, kNow).rejected());
}

TEST_CASE("a call id is refused at most once") {
  AdmissionState st({});
  st.set_targets({100.0, 100.0});
  const auto first = st.decide("x", kA, kNow);
  CHECK(first == Decision::reject(503));
  CHECK(triggers_failover(classify_response(first.failure_code)));
  CHECK_FALSE(st.decide("x", kB, kNow).rejected());
  CHECK_FALSE(st.decide("x", kA, kNow).rejected());
}

TEST_CASE("remembered rejections expire after the TTL") {
  AdmissionConfig cfg;
  cfg.rejection_ttl = Seconds{60};
  AdmissionState st(cfg);
  st.set_targets({100.0, 100.0});
  CHECK(st.decide("x", kA, kNow).rejected());
  CHECK(st.remembered_rejections() == 1);
  CHECK_FALSE(st.decide("x", kA, kNow + Seconds{59}).rejected());
  CHECK(st.decide("y", kA, kNow + Seconds{60}).rejected());
  CHECK(st.remembered_rejections() == 1);  // x purged, y remembered
  CHECK(st.decide("x", kA, kNow + Seconds{61}).rejected());
}

TEST_CASE("unknown vendor is a routing configuration error") {
  AdmissionState st({});
  CHECK_THROWS_AS(st.decide("x", VendorId{7}, kNow), RoutingConfigError);
  CHECK_THROWS_AS(st.record_decision(VendorId{7}, Decision::accept()), RoutingConfigError);
}

TEST_CASE("invalid configuration") {
  AdmissionConfig cfg;
  cfg.reject_code = 200;
  CHECK_THROWS_AS(AdmissionState{cfg}, ValidationError);
  cfg = {};
  cfg.vendors = {kA, kA};
  CHECK_THROWS_AS(AdmissionState{cfg}, ValidationError);
  AdmissionState st({});
  CHECK_THROWS_AS(st.set_targets({101.0, 0.0}), ValidationError);
}

TEST_CASE("empirical rejection rate follows the target") {
  AdmissionConfig cfg;
  cfg.seed = 12345;
  AdmissionState st(cfg);
  st.set_targets({12.77, 0.0});
  int rejected = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) rejected += st.decide(id(i), kA, kNow).rejected();
  CHECK(std::abs(100.0 * rejected / n - 12.77) < 0.3);
}

TEST_CASE("record_decision keeps received and rejected apart") {
  AdmissionState st({});
  for (int i = 0; i < 5; ++i) st.record_decision(kA, Decision::accept());
  for (int i = 0; i < 2; ++i) st.record_decision(kA, Decision::reject(503));
  auto c = st.counters();
  CHECK(c.received == std::array<std::uint64_t, 2>{5, 0});
  CHECK(c.rejected == std::array<std::uint64_t, 2>{2, 0});
  CHECK(st.drain_counters() == c);
  CHECK(st.counters() == IntervalCounters{});
}

TEST_CASE("refresh swaps targets for subsequent draws") {
  AdmissionState st({});
  RejectionResult r;
  r.reject_pct = {12.77, 0.0};
  st.refresh_targets(r);
  CHECK(st.targets() == std::array{12.77, 0.0});
  r.reject_pct = {81.4, 0.0};
  st.refresh_targets(r);
  CHECK(st.targets() == std::array{81.4, 0.0});
  int rejected = 0;
  for (int i = 0; i < 20000; ++i) rejected += st.decide(id(i), kA, kNow).rejected();
  CHECK(std::abs(rejected / 200.0 - 81.4) < 1.0);
}

TEST_CASE("same seed and arrivals give the same decisions") {
  auto run = [] {
    AdmissionConfig cfg;
    cfg.seed = 99;
    AdmissionState st(cfg);
    st.set_targets({40.0, 20.0});
    std::vector<bool> out;
    for (int i = 0; i < 5000; ++i) out.push_back(st.decide(id(i % 3000), i % 2 ? kA : kB, kNow).rejected());
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("concurrent decisions with a target refresh in the middle") {
  AdmissionConfig cfg;
  cfg.seed = 3;
  AdmissionState st(cfg);
  st.set_targets({30.0, 10.0});
  constexpr int kThreads = 8;
  constexpr int kPerThread = 20000;
  std::vector<std::vector<std::pair<std::string, bool>>> logs(kThreads);
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < kPerThread; ++i) {
        // Threads share call ids so the test-and-insert is contended.
        const std::string cid = id(i);
        const VendorId v = (i + t) % 2 ? kA : kB;
        const auto d = st.admit(cid, v, kNow);
        logs[t].emplace_back(cid, d.rejected());
      }
    });
  }
  std::thread refresher([&] {
    for (int k = 0; k < 100; ++k) st.set_targets({k % 2 ? 70.0 : 30.0, 10.0});
  });
  for (auto& th : threads) th.join();
  refresher.join();

  const auto c = st.counters();
  const auto total = c.received[0] + c.received[1] + c.rejected[0] + c.rejected[1];
  CHECK(total == static_cast<std::uint64_t>(kThreads) * kPerThread);
  std::set<std::string> rejected_ids;
  std::size_t rejections = 0;
  for (const auto& log : logs) {
    for (const auto& [cid, rej] : log) {
      if (rej) {
        ++rejections;
        rejected_ids.insert(cid);
      }
    }
  }
  CHECK(rejections == rejected_ids.size());
  CHECK(rejections == c.rejected[0] + c.rejected[1]);
}
