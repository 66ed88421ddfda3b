#pragma once

#include <string>
#include <vector>

#include "lrcp/errors.hpp"
#include "lrcp/lowrank_gauss.hpp"

namespace lrcp {

enum class Frequency { Integer, Min30, Hourly, Daily };
enum class Domain { Real, Count };

Frequency frequency_from_string(const std::string& s);
std::string frequency_to_string(Frequency f);

// N x T observation panel. Timestamps are epoch seconds at the declared
// frequency, or plain 0,1,2,... indices (Frequency::Integer), in which
// case calendar features are disabled.
struct TimeSeriesPanel {
    Matrix values;  // N x T
    std::vector<std::string> series_ids;
    std::vector<long long> timestamps;
    Frequency frequency = Frequency::Integer;
    std::vector<Domain> domain;

    int num_series() const { return static_cast<int>(values.rows()); }
    int num_steps() const { return static_cast<int>(values.cols()); }
};

// CSV with header (timestamp, id1, id2, ...), one row per timestamp.
// Rejects gaps, ragged rows and non-monotone timestamps. Count domain is
// inferred per series when every value is a nonnegative integer.
TimeSeriesPanel read_panel(const std::string& path, Frequency frequency);
void write_panel(const TimeSeriesPanel& panel, const std::string& path);

long long frequency_step_seconds(Frequency f);

// Calendar features, each a single real scaled into [0,1):
//   hourly -> (hour/24, dow/7, (dom-1)/31)   daily -> (dow/7)
//   30min  -> (minute/60, hour/24, dow/7)    integer -> none
// dow is zero-based from Monday, dom zero-based within the month.
Matrix build_covariates(const std::vector<long long>& timestamps, Frequency f);
int num_time_features(Frequency f);

// Input lag sets by frequency.
std::vector<int> lag_set(Frequency f);

struct RollingWindow {
    int train_end;   // forecasts start here
    int eval_begin;  // == train_end
    int eval_end;    // train_end + horizon
};

// Equally spaced windows ending at the panel end; the model is meant to
// be trained once on data preceding the first window.
std::vector<RollingWindow> rolling_windows(const TimeSeriesPanel& panel,
                                           int horizon, int num_windows,
                                           int stride);

}  // namespace lrcp
