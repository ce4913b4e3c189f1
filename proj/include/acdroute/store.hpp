#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "acdroute/domain.hpp"

namespace acdroute {

/// I/O failure in a persistence backend.
class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One row of the acd_vendors table: the outcome for one vendor of one closed interval.
struct AcdRow {
  std::uint64_t id = 0;
  VendorId vendor;
  Timestamp date;
  std::optional<double> acd_min;
  double reject_pct = 0.0;  // two decimals
  std::string prefix;

  friend bool operator==(const AcdRow&, const AcdRow&) = default;
};

/// Half-open [start, end).
struct TimeRange {
  Timestamp start;
  Timestamp end;

  [[nodiscard]] bool contains(Timestamp t) const { return start <= t && t < end; }
};

/// Persistence boundary for CDRs and closed-interval rows.
///
/// Implementations allow concurrent readers and serialize writers. The CDR
/// log is append-only.
class Store {
 public:
  virtual ~Store() = default;

  virtual std::uint64_t append_cdr(const CallRecord& record) = 0;
  /// Persists both rows of one closed interval atomically and returns their ids.
  virtual std::array<std::uint64_t, 2> insert_acd_rows(const std::array<AcdRow, 2>& rows) = 0;
  /// Records whose disconnect_time lies in `range`, ordered by disconnect_time
  /// (append order on ties).
  [[nodiscard]] virtual std::vector<CallRecord> query_cdrs(std::optional<VendorId> vendor,
                                                           TimeRange range) const = 0;
  /// The pair with the highest ids, if any interval was ever closed.
  [[nodiscard]] virtual std::optional<std::array<AcdRow, 2>> latest_targets() const = 0;
  [[nodiscard]] virtual std::vector<AcdRow> acd_rows() const = 0;
  /// The whole log in append order.
  [[nodiscard]] virtual std::vector<CallRecord> cdrs() const = 0;
};

/// In-memory store.
class MemoryStore : public Store {
 public:
  std::uint64_t append_cdr(const CallRecord& record) override;
  std::array<std::uint64_t, 2> insert_acd_rows(const std::array<AcdRow, 2>& rows) override;
  [[nodiscard]] std::vector<CallRecord> query_cdrs(std::optional<VendorId> vendor,
                                                   TimeRange range) const override;
  [[nodiscard]] std::optional<std::array<AcdRow, 2>> latest_targets() const override;
  [[nodiscard]] std::vector<AcdRow> acd_rows() const override;
  [[nodiscard]] std::vector<CallRecord> cdrs() const override;

 protected:
  // Hooks run under the writer lock before the in-memory state changes; a
  // throwing hook leaves the store untouched.
  virtual void persist_cdr(const CallRecord&) {}
  virtual void persist_acd_rows(const std::array<AcdRow, 2>&) {}

  void load(std::vector<CallRecord> records, std::vector<AcdRow> rows);

 private:
  mutable std::shared_mutex mutex_;
  std::vector<CallRecord> log_;
  std::multimap<Timestamp, std::size_t> by_disconnect_;
  std::vector<AcdRow> acd_rows_;
  std::uint64_t next_acd_id_ = 1;
};

/// Flat-file store: `cdrs.csv` and `acd_vendors.csv` inside a directory, with
/// the in-memory index of MemoryStore. Existing files are loaded on open.
class FileStore : public MemoryStore {
 public:
  explicit FileStore(std::filesystem::path dir);

  [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

 protected:
  void persist_cdr(const CallRecord& record) override;
  void persist_acd_rows(const std::array<AcdRow, 2>& rows) override;

 private:
  std::filesystem::path dir_;
  std::ofstream cdr_out_;
  std::ofstream acd_out_;
};

// CSV schemas.

inline constexpr std::string_view kCdrCsvHeader =
    "call_id,vendor,connect_time,disconnect_time,duration_s,cause,rejected";
inline constexpr std::string_view kAcdCsvHeader = "id,vendor,date,acd_min,reject_pct,prefix";

std::string format_cdr_line(const CallRecord& record);
/// Parses one data line; throws ValidationError describing the first bad field.
CallRecord parse_cdr_line(std::string_view line);

std::string format_acd_line(const AcdRow& row);
AcdRow parse_acd_line(std::string_view line);

struct LineError {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string message;
};

struct CdrCsv {
  std::vector<CallRecord> records;
  std::vector<LineError> errors;
};

/// Reads a whole CDR file. Malformed rows are reported and skipped; a missing
/// or wrong header is reported as an error on line 1.
CdrCsv read_cdr_csv(std::istream& in);
void write_cdr_csv(std::ostream& out, std::span<const CallRecord> records);

std::vector<AcdRow> read_acd_csv(std::istream& in);
void write_acd_csv(std::ostream& out, std::span<const AcdRow> rows);

/// `%.2f`, independent of the global locale.
std::string format_fixed(double value, int decimals);

}  // namespace acdroute
