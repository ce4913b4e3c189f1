#include "acdroute/store.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <mutex>
#include <ostream>

namespace acdroute {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

std::string_view cause_token(const DisconnectCause& cause) {
  switch (cause.kind) {
    case CauseKind::NormalClearing: return "normal";
    case CauseKind::NoUserResponding: return "no_answer";
    case CauseKind::Other: return "other";
  }
  return "other";
}

DisconnectCause parse_cause(std::string_view token) {
  if (token == "normal") return DisconnectCause::normal();
  if (token == "no_answer") return DisconnectCause::no_answer();
  if (token == "other") return DisconnectCause::other(0);
  throw ValidationError("bad cause '" + std::string(token) + "'");
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::string format_fixed(double value, int decimals) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) return "nan";
  std::string out(buf, ptr);
  if (out.find_first_not_of("-0.") == std::string::npos && out.front() == '-') out.erase(0, 1);
  return out;
}

std::string format_cdr_line(const CallRecord& r) {
  std::string line;
  line.reserve(96);
  line += r.call_id;
  line += ',';
  line += std::to_string(r.vendor.value);
  line += ',';
  line += format_timestamp(r.connect_time);
  line += ',';
  line += format_timestamp(r.disconnect_time);
  line += ',';
  line += std::to_string(r.duration_s);
  line += ',';
  line += cause_token(r.disconnect_cause);
  line += ',';
  line += r.rejected_by_router ? '1' : '0';
  return line;
}

CallRecord parse_cdr_line(std::string_view line) {
  const auto f = split_csv(strip_cr(line));
  if (f.size() != 7) {
    throw ValidationError("expected 7 fields, got " + std::to_string(f.size()));
  }
  CallRecord r;
  r.call_id = std::string(f[0]);
  r.vendor = VendorId{parse_number<std::uint32_t>(f[1], "vendor")};
  r.connect_time = parse_timestamp(f[2]);
  r.disconnect_time = parse_timestamp(f[3]);
  r.duration_s = parse_number<std::int64_t>(f[4], "duration_s");
  r.disconnect_cause = parse_cause(f[5]);
  if (f[6] != "0" && f[6] != "1") {
    throw ValidationError("bad rejected flag '" + std::string(f[6]) + "'");
  }
  r.rejected_by_router = f[6] == "1";
  validate(r);
  return r;
}

std::string format_acd_line(const AcdRow& row) {
  std::string line = std::to_string(row.id);
  line += ',';
  line += std::to_string(row.vendor.value);
  line += ',';
  line += format_timestamp(row.date);
  line += ',';
  if (row.acd_min) line += format_fixed(*row.acd_min, 2);
  line += ',';
  line += format_fixed(row.reject_pct, 2);
  line += ',';
  line += row.prefix;
  return line;
}

AcdRow parse_acd_line(std::string_view line) {
  const auto f = split_csv(strip_cr(line));
  if (f.size() != 6) {
    throw ValidationError("expected 6 fields, got " + std::to_string(f.size()));
  }
  AcdRow row;
  row.id = parse_number<std::uint64_t>(f[0], "id");
  row.vendor = VendorId{parse_number<std::uint32_t>(f[1], "vendor")};
  row.date = parse_timestamp(f[2]);
  if (!f[3].empty()) row.acd_min = parse_number<double>(f[3], "acd_min");
  row.reject_pct = parse_number<double>(f[4], "reject_pct");
  row.prefix = std::string(f[5]);
  return row;
}

CdrCsv read_cdr_csv(std::istream& in) {
  CdrCsv out;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) return out;
  ++lineno;
  if (strip_cr(line) != kCdrCsvHeader) {
    out.errors.push_back({lineno, "expected header '" + std::string(kCdrCsvHeader) + "'"});
    return out;
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (strip_cr(line).empty()) continue;
    try {
      out.records.push_back(parse_cdr_line(line));
    } catch (const ValidationError& e) {
      out.errors.push_back({lineno, e.what()});
    }
  }
  return out;
}

void write_cdr_csv(std::ostream& out, std::span<const CallRecord> records) {
  out << kCdrCsvHeader << '\n';
  for (const auto& r : records) out << format_cdr_line(r) << '\n';
}

std::vector<AcdRow> read_acd_csv(std::istream& in) {
  std::vector<AcdRow> rows;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) return rows;
  if (strip_cr(line) != kAcdCsvHeader) {
    throw ValidationError("acd_vendors: expected header '" + std::string(kAcdCsvHeader) + "'");
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (strip_cr(line).empty()) continue;
    try {
      rows.push_back(parse_acd_line(line));
    } catch (const ValidationError& e) {
      throw ValidationError("acd_vendors line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

void write_acd_csv(std::ostream& out, std::span<const AcdRow> rows) {
  out << kAcdCsvHeader << '\n';
  for (const auto& r : rows) out << format_acd_line(r) << '\n';
}

// MemoryStore

std::uint64_t MemoryStore::append_cdr(const CallRecord& record) {
  validate(record);
  std::unique_lock lock(mutex_);
  persist_cdr(record);
  log_.push_back(record);
  by_disconnect_.emplace(record.disconnect_time, log_.size() - 1);
  return log_.size();
}

std::array<std::uint64_t, 2> MemoryStore::insert_acd_rows(const std::array<AcdRow, 2>& rows) {
  for (const auto& r : rows) {
    if (!(r.reject_pct >= 0.0 && r.reject_pct <= 100.0)) {
      throw ValidationError("reject_pct outside [0, 100]");
    }
  }
  if (rows[0].date != rows[1].date) {
    throw ValidationError("acd rows of one interval must share a date");
  }
  std::unique_lock lock(mutex_);
  std::array<AcdRow, 2> stamped = rows;
  stamped[0].id = next_acd_id_;
  stamped[1].id = next_acd_id_ + 1;
  persist_acd_rows(stamped);
  acd_rows_.push_back(stamped[0]);
  acd_rows_.push_back(stamped[1]);
  next_acd_id_ += 2;
  return {stamped[0].id, stamped[1].id};
}

std::vector<CallRecord> MemoryStore::query_cdrs(std::optional<VendorId> vendor,
                                                TimeRange range) const {
  if (range.end < range.start) {
    throw ValidationError("inverted time range");
  }
  std::shared_lock lock(mutex_);
  std::vector<CallRecord> out;
  const auto first = by_disconnect_.lower_bound(range.start);
  const auto last = by_disconnect_.lower_bound(range.end);
  for (auto it = first; it != last; ++it) {
    const auto& r = log_[it->second];
    if (!vendor || r.vendor == *vendor) out.push_back(r);
  }
  return out;
}

std::optional<std::array<AcdRow, 2>> MemoryStore::latest_targets() const {
  std::shared_lock lock(mutex_);
  if (acd_rows_.size() < 2) return std::nullopt;
  return std::array<AcdRow, 2>{acd_rows_[acd_rows_.size() - 2], acd_rows_.back()};
}

std::vector<AcdRow> MemoryStore::acd_rows() const {
  std::shared_lock lock(mutex_);
  return acd_rows_;
}

std::vector<CallRecord> MemoryStore::cdrs() const {
  std::shared_lock lock(mutex_);
  return log_;
}

void MemoryStore::load(std::vector<CallRecord> records, std::vector<AcdRow> rows) {
  std::unique_lock lock(mutex_);
  log_ = std::move(records);
  by_disconnect_.clear();
  for (std::size_t i = 0; i < log_.size(); ++i) {
    by_disconnect_.emplace(log_[i].disconnect_time, i);
  }
  acd_rows_ = std::move(rows);
  next_acd_id_ = 1;
  for (const auto& r : acd_rows_) next_acd_id_ = std::max(next_acd_id_, r.id + 1);
}

// FileStore

FileStore::FileStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw StorageError("cannot create " + dir_.string() + ": " + ec.message());

  const auto cdr_path = dir_ / "cdrs.csv";
  const auto acd_path = dir_ / "acd_vendors.csv";
  std::vector<CallRecord> records;
  std::vector<AcdRow> rows;
  const bool have_cdrs = std::filesystem::exists(cdr_path);
  const bool have_acd = std::filesystem::exists(acd_path);
  if (have_cdrs) {
    std::ifstream in(cdr_path);
    auto parsed = read_cdr_csv(in);
    if (!parsed.errors.empty()) {
      const auto& e = parsed.errors.front();
      throw StorageError(cdr_path.string() + ":" + std::to_string(e.line) + ": " + e.message);
    }
    records = std::move(parsed.records);
  }
  if (have_acd) {
    std::ifstream in(acd_path);
    rows = read_acd_csv(in);
  }
  load(std::move(records), std::move(rows));

  cdr_out_.open(cdr_path, std::ios::app | std::ios::binary);
  acd_out_.open(acd_path, std::ios::app | std::ios::binary);
  if (!cdr_out_ || !acd_out_) throw StorageError("cannot open store files in " + dir_.string());
  if (!have_cdrs) cdr_out_ << kCdrCsvHeader << '\n' << std::flush;
  if (!have_acd) acd_out_ << kAcdCsvHeader << '\n' << std::flush;
}

void FileStore::persist_cdr(const CallRecord& record) {
  cdr_out_ << format_cdr_line(record) << '\n';
  cdr_out_.flush();
  if (!cdr_out_) throw StorageError("write failed: " + (dir_ / "cdrs.csv").string());
}

void FileStore::persist_acd_rows(const std::array<AcdRow, 2>& rows) {
  // One write so a reader of the file never sees half an interval.
  const std::string chunk = format_acd_line(rows[0]) + '\n' + format_acd_line(rows[1]) + '\n';
  acd_out_.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
  acd_out_.flush();
  if (!acd_out_) throw StorageError("write failed: " + (dir_ / "acd_vendors.csv").string());
}

}  // namespace acdroute
