#include "acdroute/admission.hpp"

namespace acdroute {

AdmissionState::AdmissionState(AdmissionConfig config)
    : config_(config), rng_(config.seed) {
  if (config_.vendors[0] == config_.vendors[1]) {
    throw ValidationError("admission needs two distinct vendors");
  }
  if (!triggers_failover(classify_response(config_.reject_code))) {
    throw ValidationError("reject code must be 4xx, 5xx or 6xx");
  }
  if (config_.rejection_ttl <= Seconds{0}) {
    throw ValidationError("rejection TTL must be positive");
  }
}

std::size_t AdmissionState::index(VendorId vendor) const {
  const auto i = find_index(config_.vendors, vendor);
  if (!i) {
    throw RoutingConfigError("call on unknown clone interface for vendor " +
                             std::to_string(vendor.value));
  }
  return *i;
}

void AdmissionState::purge_expired(Timestamp now) {
  while (!expiry_queue_.empty() && expiry_queue_.front().first <= now) {
    const auto it = seen_.find(expiry_queue_.front().second);
    if (it != seen_.end() && it->second <= now) seen_.erase(it);
    expiry_queue_.pop_front();
  }
}

Decision AdmissionState::decide(std::string_view call_id, VendorId vendor, Timestamp now) {
  const std::size_t i = index(vendor);
  std::lock_guard lock(mutex_);
  purge_expired(now);
  if (!targets_) return Decision::accept();
  std::string key(call_id);
  if (seen_.contains(key)) return Decision::accept();
  const double u = uniform01(rng_);
  if (u < (*targets_)[i] / 100.0) {
    const Timestamp expiry = now + config_.rejection_ttl;
    seen_.emplace(key, expiry);
    expiry_queue_.emplace_back(expiry, std::move(key));
    return Decision::reject(config_.reject_code);
  }
  return Decision::accept();
}

void AdmissionState::record_decision(VendorId vendor, const Decision& decision) {
  const std::size_t i = index(vendor);
  auto& counter = decision.rejected() ? rejected_[i] : received_[i];
  counter.fetch_add(1, std::memory_order_relaxed);
}

Decision AdmissionState::admit(std::string_view call_id, VendorId vendor, Timestamp now) {
  const Decision d = decide(call_id, vendor, now);
  record_decision(vendor, d);
  return d;
}

void AdmissionState::refresh_targets(const RejectionResult& result) {
  set_targets(result.reject_pct);
}

void AdmissionState::set_targets(std::array<double, 2> reject_pct) {
  for (double p : reject_pct) {
    if (!(p >= 0.0 && p <= 100.0)) throw ValidationError("reject target outside [0, 100]");
  }
  std::lock_guard lock(mutex_);
  targets_ = reject_pct;
}

std::optional<std::array<double, 2>> AdmissionState::targets() const {
  std::lock_guard lock(mutex_);
  return targets_;
}

IntervalCounters AdmissionState::counters() const {
  IntervalCounters c;
  for (std::size_t i = 0; i < 2; ++i) {
    c.received[i] = received_[i].load(std::memory_order_relaxed);
    c.rejected[i] = rejected_[i].load(std::memory_order_relaxed);
  }
  return c;
}

IntervalCounters AdmissionState::drain_counters() {
  IntervalCounters c;
  for (std::size_t i = 0; i < 2; ++i) {
    c.received[i] = received_[i].exchange(0, std::memory_order_relaxed);
    c.rejected[i] = rejected_[i].exchange(0, std::memory_order_relaxed);
  }
  return c;
}

std::size_t AdmissionState::remembered_rejections() const {
  std::lock_guard lock(mutex_);
  return seen_.size();
}

}  // namespace acdroute
