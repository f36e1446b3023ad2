#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "trackfuse/linalg.hpp"

namespace trackfuse {

struct OspaParams {
    double c = 50.0;
    double p = 2.0;
    int w = 10;

    void validate() const;
};

/// OSPA between two finite sets of points (positions).
double ospa(const std::vector<Vector>& X, const std::vector<Vector>& Y, const OspaParams& params = {});

// Labeled trajectory: scan index -> position.
struct Trajectory {
    int label = 0;
    std::map<int, Vector> states;
};

/// OSPA^(2) at scan k over the window [k - w + 1, k]. The base distance between two
/// tracks is the order-p mean over window scans where at least one of them exists
/// of min(d, c) (both exist) or c (only one exists).
double ospa2(const std::vector<Trajectory>& X, const std::vector<Trajectory>& Y, int k,
             const OspaParams& params = {});

enum class PayloadKind { Raw, InfoFilter, Type1, Type2 };

std::string to_string(PayloadKind kind);
/// Parses "raw", "info_filter" (or "info"), "type1", "type2". Throws InvalidInput.
PayloadKind parse_payload(const std::string& name);

inline constexpr std::uint64_t kBytesPerScalar = 8;

/// Bytes per scan for `n_max` tracks of measurement dimension m and state dimension n.
std::uint64_t comm_bytes(PayloadKind kind, int m, int n, std::uint64_t n_max);

struct CommLedger {
    // (scan, sensor, kind) -> bytes
    std::map<std::tuple<int, int, PayloadKind>, std::uint64_t> entries;

    std::uint64_t total(PayloadKind kind) const;
    std::uint64_t scan_total(int scan, PayloadKind kind) const;
};

/// Adds the bytes of n_tracks_sent track reports to the (scan, sensor) entry.
CommLedger& ledger_record(CommLedger& ledger, int scan, int sensor, std::uint64_t n_tracks_sent, PayloadKind kind,
                          int m, int n);

}  // namespace trackfuse
