#include <gtest/gtest.h>

#include <cmath>

#include "trackfuse/errors.hpp"
#include "trackfuse/metrics.hpp"

using namespace trackfuse;

namespace {

Vector pt(double x, double y) {
    Vector v(2);
    v << x, y;
    return v;
}

}  // namespace

TEST(Ospa, HandComputedValues) {
    OspaParams p;  // c = 50, p = 2
    EXPECT_EQ(ospa({}, {}, p), 0.0);
    EXPECT_DOUBLE_EQ(ospa({pt(0, 0)}, {}, p), 50.0);
    EXPECT_NEAR(ospa({pt(0, 0)}, {pt(3, 4)}, p), 5.0, 1e-14);
    // One matched at distance 0, one unmatched: sqrt((0 + 50^2) / 2).
    EXPECT_NEAR(ospa({pt(0, 0), pt(100, 0)}, {pt(0, 0)}, p), 50.0 / std::sqrt(2.0), 1e-12);
    // The optimal pairing is the crossed one.
    EXPECT_NEAR(ospa({pt(0, 0), pt(10, 0)}, {pt(11, 0), pt(1, 0)}, p), 1.0, 1e-14);
    // Distances beyond the cut-off saturate.
    EXPECT_NEAR(ospa({pt(0, 0)}, {pt(500, 0)}, p), 50.0, 1e-14);
    OspaParams p1{10.0, 1.0, 10};
    EXPECT_NEAR(ospa({pt(0, 0), pt(0, 5)}, {pt(0, 3)}, p1), (2.0 + 10.0) / 2.0, 1e-14);
}

TEST(Ospa, InvalidParameters) {
    EXPECT_THROW(ospa({}, {}, OspaParams{0.0, 2.0, 10}), ConfigurationError);
    EXPECT_THROW(ospa({}, {}, OspaParams{50.0, 0.5, 10}), ConfigurationError);
}

TEST(Ospa2, WindowedTrackDistance) {
    OspaParams p{50.0, 2.0, 3};
    Trajectory truth{1, {{1, pt(0, 0)}, {2, pt(1, 0)}, {3, pt(2, 0)}}};
    Trajectory est{7, {{2, pt(1, 3)}, {3, pt(2, 4)}}};
    // Window [1, 3]: scan 1 only truth (c^2), scans 2 and 3 give 9 and 16.
    const double base = std::sqrt((2500.0 + 9.0 + 16.0) / 3.0);
    EXPECT_NEAR(ospa2({truth}, {est}, 3, p), base, 1e-12);
    EXPECT_NEAR(ospa2({est}, {truth}, 3, p), base, 1e-12);
    // Window [2, 4]: scan 4 has neither, so only two scans count.
    EXPECT_NEAR(ospa2({truth}, {est}, 4, p), std::sqrt(25.0 / 2.0), 1e-12);
    // Tracks outside the window are ignored.
    EXPECT_EQ(ospa2({truth}, {est}, 10, p), 0.0);
    EXPECT_DOUBLE_EQ(ospa2({truth}, {}, 3, p), 50.0);
}

TEST(CommBytes, PerTrackFormulas) {
    EXPECT_EQ(comm_bytes(PayloadKind::Raw, 2, 4, 100), 10400u);
    EXPECT_EQ(comm_bytes(PayloadKind::InfoFilter, 2, 4, 100), 22400u);
    EXPECT_EQ(comm_bytes(PayloadKind::Type1, 2, 4, 100), 8000u);
    EXPECT_EQ(comm_bytes(PayloadKind::Type2, 2, 4, 100), 4000u);
    EXPECT_EQ(comm_bytes(PayloadKind::Raw, 2, 4, 0), 0u);
    EXPECT_THROW(comm_bytes(PayloadKind::Raw, 0, 4, 1), InvalidInput);
    for (int m = 1; m <= 6; ++m) {
        for (int n = 1; n <= 6; ++n) {
            EXPECT_LE(comm_bytes(PayloadKind::Type1, m, n, 1), comm_bytes(PayloadKind::Raw, m, n, 1));
            EXPECT_LE(comm_bytes(PayloadKind::Type2, m, n, 1), comm_bytes(PayloadKind::Raw, m, n, 1));
        }
    }
}

TEST(CommBytes, LedgerAccumulates) {
    CommLedger ledger;
    ledger_record(ledger, 1, 1, 3, PayloadKind::Raw, 2, 4);
    ledger_record(ledger, 1, 2, 2, PayloadKind::Raw, 2, 4);
    ledger_record(ledger, 2, 1, 0, PayloadKind::Raw, 2, 4);
    ledger_record(ledger, 1, 1, 3, PayloadKind::Type2, 2, 4);
    EXPECT_EQ(ledger.scan_total(1, PayloadKind::Raw), 5u * 104u);
    EXPECT_EQ(ledger.scan_total(2, PayloadKind::Raw), 0u);
    EXPECT_EQ(ledger.total(PayloadKind::Raw), 5u * 104u);
    EXPECT_EQ(ledger.total(PayloadKind::Type2), 3u * 40u);
}

TEST(Payload, ParseAndPrint) {
    for (PayloadKind k : {PayloadKind::Raw, PayloadKind::InfoFilter, PayloadKind::Type1, PayloadKind::Type2}) {
        EXPECT_EQ(parse_payload(to_string(k)), k);
    }
    EXPECT_EQ(parse_payload("info"), PayloadKind::InfoFilter);
    EXPECT_THROW(parse_payload("type3"), InvalidInput);
}
