#include "lrcp/data_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lrcp {

Frequency frequency_from_string(const std::string& s) {
    if (s == "30min") return Frequency::Min30;
    if (s == "hourly") return Frequency::Hourly;
    if (s == "daily") return Frequency::Daily;
    if (s == "integer") return Frequency::Integer;
    throw ConfigError("unknown frequency '" + s +
                      "' (expected 30min, hourly, daily or integer)");
}

std::string frequency_to_string(Frequency f) {
    switch (f) {
        case Frequency::Min30: return "30min";
        case Frequency::Hourly: return "hourly";
        case Frequency::Daily: return "daily";
        default: return "integer";
    }
}

long long frequency_step_seconds(Frequency f) {
    switch (f) {
        case Frequency::Min30: return 1800;
        case Frequency::Hourly: return 3600;
        case Frequency::Daily: return 86400;
        default: return 1;
    }
}

namespace {

// Days since 1970-01-01 from a civil date (Howard Hinnant's algorithm).
long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

void civil_from_days(long long z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long long yy = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yy + (m <= 2));
}

// Accepts "YYYY-MM-DD", "YYYY-MM-DD HH:MM[:SS]" or with a 'T' separator,
// or a plain integer index.
bool parse_timestamp(const std::string& s, Frequency f, long long& out) {
    if (f == Frequency::Integer) {
        char* end = nullptr;
        errno = 0;
        long long v = std::strtoll(s.c_str(), &end, 10);
        if (errno || end == s.c_str() || *end != '\0') return false;
        out = v;
        return true;
    }
    int y, mo, d, h = 0, mi = 0, sec = 0;
    char sep = 0;
    int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h,
                        &mi, &sec);
    if (n != 3 && n != 6 && n != 7) return false;
    if (n >= 6 && sep != ' ' && sep != 'T') return false;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60)
        return false;
    out = days_from_civil(y, mo, d) * 86400LL + h * 3600LL + mi * 60LL + sec;
    return true;
}

std::string format_timestamp(long long t, Frequency f) {
    if (f == Frequency::Integer) return std::to_string(t);
    long long days = t / 86400;
    long long rem = t - days * 86400;
    if (rem < 0) { rem += 86400; days -= 1; }
    int y; unsigned mo, d;
    civil_from_days(days, y, mo, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02lld:%02lld:%02lld", y, mo,
                  d, rem / 3600, (rem / 60) % 60, rem % 60);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

TimeSeriesPanel read_panel(const std::string& path, Frequency frequency) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open panel file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty panel file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "timestamp")
        throw DataError("panel header must start with 'timestamp'");

    TimeSeriesPanel panel;
    panel.frequency = frequency;
    panel.series_ids.assign(header.begin() + 1, header.end());
    const size_t n = panel.series_ids.size();
    const long long step = frequency_step_seconds(frequency);

    std::vector<long long> times;
    std::vector<std::vector<double>> cols(n);
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != n + 1)
            throw DataError("row " + std::to_string(row) + ": expected " +
                            std::to_string(n + 1) + " fields, got " +
                            std::to_string(fields.size()));
        long long t;
        if (!parse_timestamp(fields[0], frequency, t))
            throw DataError("row " + std::to_string(row) +
                            ": unparseable timestamp '" + fields[0] + "'");
        if (!times.empty()) {
            if (t <= times.back())
                throw DataError("row " + std::to_string(row) +
                                ": non-monotone timestamp");
            if (t != times.back() + step)
                throw DataError("row " + std::to_string(row) +
                                ": gap, expected timestamp " +
                                format_timestamp(times.back() + step, frequency));
        }
        times.push_back(t);
        for (size_t j = 0; j < n; ++j) {
            char* end = nullptr;
            errno = 0;
            double v = std::strtod(fields[j + 1].c_str(), &end);
            if (errno || end == fields[j + 1].c_str() || *end != '\0' ||
                !std::isfinite(v))
                throw DataError("row " + std::to_string(row) + ", column '" +
                                panel.series_ids[j] + "': unparseable number '" +
                                fields[j + 1] + "'");
            cols[j].push_back(v);
        }
    }
    if (times.empty()) throw DataError("panel has no data rows: " + path);

    panel.timestamps = std::move(times);
    panel.values = Matrix(n, panel.timestamps.size());
    panel.domain.resize(n);
    for (size_t j = 0; j < n; ++j) {
        bool all_counts = true;
        for (size_t t = 0; t < cols[j].size(); ++t) {
            panel.values(j, t) = cols[j][t];
            if (cols[j][t] < 0.0 || cols[j][t] != std::floor(cols[j][t]))
                all_counts = false;
        }
        panel.domain[j] = all_counts ? Domain::Count : Domain::Real;
    }
    return panel;
}

void write_panel(const TimeSeriesPanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write panel file: " + path);
    out << "timestamp";
    for (const auto& id : panel.series_ids) out << "," << id;
    out << "\n";
    char buf[40];
    for (int t = 0; t < panel.num_steps(); ++t) {
        out << format_timestamp(panel.timestamps[t], panel.frequency);
        for (int i = 0; i < panel.num_series(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", panel.values(i, t));
            out << "," << buf;
        }
        out << "\n";
    }
}

int num_time_features(Frequency f) {
    switch (f) {
        case Frequency::Min30: return 3;
        case Frequency::Hourly: return 3;
        case Frequency::Daily: return 1;
        default: return 0;
    }
}

Matrix build_covariates(const std::vector<long long>& timestamps, Frequency f) {
    const int nf = num_time_features(f);
    Matrix feats(static_cast<int>(timestamps.size()), nf);
    if (nf == 0) return feats;
    for (size_t t = 0; t < timestamps.size(); ++t) {
        long long ts = timestamps[t];
        long long days = ts / 86400;
        long long rem = ts - days * 86400;
        if (rem < 0) { rem += 86400; days -= 1; }
        int y; unsigned mo, dom;
        civil_from_days(days, y, mo, dom);
        double hour = static_cast<double>(rem / 3600);
        double minute = static_cast<double>((rem / 60) % 60);
        double dow = static_cast<double>(((days % 7) + 10) % 7);  // Monday = 0
        switch (f) {
            case Frequency::Min30:
                feats(t, 0) = minute / 60.0;
                feats(t, 1) = hour / 24.0;
                feats(t, 2) = dow / 7.0;
                break;
            case Frequency::Hourly:
                feats(t, 0) = hour / 24.0;
                feats(t, 1) = dow / 7.0;
                feats(t, 2) = (dom - 1) / 31.0;
                break;
            default:  // Daily
                feats(t, 0) = dow / 7.0;
                break;
        }
    }
    return feats;
}

std::vector<int> lag_set(Frequency f) {
    switch (f) {
        case Frequency::Min30: return {1, 2, 4, 12, 24, 48};
        case Frequency::Hourly: return {1, 24, 168};
        case Frequency::Daily: return {1, 7, 14};
        default: return {1};
    }
}

std::vector<RollingWindow> rolling_windows(const TimeSeriesPanel& panel,
                                           int horizon, int num_windows,
                                           int stride) {
    if (horizon < 1 || num_windows < 1 || stride < 1)
        throw ConfigError("rolling_windows: horizon, num_windows and stride must be positive");
    const int t_total = panel.num_steps();
    std::vector<RollingWindow> windows;
    for (int w = num_windows - 1; w >= 0; --w) {
        int train_end = t_total - horizon - w * stride;
        if (train_end < 1)
            throw DataError("rolling_windows: panel too short for requested windows");
        windows.push_back({train_end, train_end, train_end + horizon});
    }
    return windows;
}

}  // namespace lrcp
