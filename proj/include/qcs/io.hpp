#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcs/experiment.hpp"

namespace qcs::io {

/// Parse failure carrying the 1-based line number of the offending CSV line.
class CsvError : public std::runtime_error {
  public:
    CsvError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

inline std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline double parse_real(const std::string& text, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw CsvError(line, "expected a real number, got '" + text + "'");
    }
    if (used != text.size()) throw CsvError(line, "trailing junk in number '" + text + "'");
    return v;
}

inline long long parse_integer(const std::string& text, int line) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        throw CsvError(line, "expected an integer, got '" + text + "'");
    }
    if (used != text.size()) throw CsvError(line, "trailing junk in integer '" + text + "'");
    return v;
}

}  // namespace detail

inline constexpr const char* kSweepCsvHeader =
    "m,n,s,trials,successes,success_rate,mean_error,mean_solve_ms";
inline constexpr const char* kTrialCsvHeader =
    "m,n,s,trial,seed,error_l2,perfect,status,solve_ms";
inline constexpr const char* kDemoCsvHeader =
    "index,re,im_i,im_j,im_k,re_rec,im_i_rec,im_j_rec,im_k_rec";
inline constexpr const char* kSignalCsvHeader = "index,re,im_i,im_j,im_k";
inline constexpr const char* kInstanceCsvHeader = "kind,row,col,re,im_i,im_j,im_k";

inline void write_sweep_csv(const std::string& path, const SweepGrid& grid) {
    std::ofstream out = detail::open_out(path);
    out << kSweepCsvHeader << '\n';
    for (const SweepCell& c : grid.cells) {
        out << grid.m << ',' << c.n << ',' << c.s << ',' << grid.trials_per_cell << ','
            << c.successes << ',' << fmt_real(c.success_rate) << ',' << fmt_real(c.mean_error)
            << ',' << fmt_real(c.mean_solve_ms) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_trials_csv(const std::string& path, const std::vector<TrialResult>& trials) {
    std::ofstream out = detail::open_out(path);
    out << kTrialCsvHeader << '\n';
    std::size_t trial_in_cell = 0;
    const TrialSpec* prev = nullptr;
    for (const TrialResult& r : trials) {
        if (prev != nullptr && (prev->n != r.spec.n || prev->s != r.spec.s)) trial_in_cell = 0;
        out << r.spec.m << ',' << r.spec.n << ',' << r.spec.s << ',' << trial_in_cell << ','
            << r.spec.seed << ',' << fmt_real(r.error_l2) << ',' << (r.perfect ? 1 : 0) << ','
            << to_string(r.solver_status) << ',' << fmt_real(r.solve_time.count()) << '\n';
        prev = &r.spec;
        ++trial_in_cell;
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

/// Original signal side by side with its recovery.
inline void write_demo_csv(const std::string& path, const QVector& original,
                           const QVector& recovered) {
    if (original.size() != recovered.size()) {
        throw std::invalid_argument("write_demo_csv: length mismatch");
    }
    std::ofstream out = detail::open_out(path);
    out << kDemoCsvHeader << '\n';
    for (std::size_t r = 0; r < original.size(); ++r) {
        const Quaternion& a = original[r];
        const Quaternion& b = recovered[r];
        out << r << ',' << fmt_real(a.re) << ',' << fmt_real(a.im_i) << ',' << fmt_real(a.im_j)
            << ',' << fmt_real(a.im_k) << ',' << fmt_real(b.re) << ',' << fmt_real(b.im_i) << ','
            << fmt_real(b.im_j) << ',' << fmt_real(b.im_k) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_signal_csv(const std::string& path, const QVector& x) {
    std::ofstream out = detail::open_out(path);
    out << kSignalCsvHeader << '\n';
    for (std::size_t r = 0; r < x.size(); ++r) {
        out << r << ',' << fmt_real(x[r].re) << ',' << fmt_real(x[r].im_i) << ','
            << fmt_real(x[r].im_j) << ',' << fmt_real(x[r].im_k) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

struct InstanceData {
    QMatrix A;
    QVector y;
};

inline void write_instance_csv(const std::string& path, const QMatrix& A, const QVector& y) {
    if (A.rows() != y.size()) throw std::invalid_argument("write_instance_csv: dimension mismatch");
    std::ofstream out = detail::open_out(path);
    out << kInstanceCsvHeader << '\n';
    for (std::size_t i = 0; i < A.rows(); ++i) {
        for (std::size_t r = 0; r < A.cols(); ++r) {
            const Quaternion& q = A(i, r);
            out << "A," << i << ',' << r << ',' << fmt_real(q.re) << ',' << fmt_real(q.im_i)
                << ',' << fmt_real(q.im_j) << ',' << fmt_real(q.im_k) << '\n';
        }
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        const Quaternion& q = y[i];
        out << "y," << i << ",0," << fmt_real(q.re) << ',' << fmt_real(q.im_i) << ','
            << fmt_real(q.im_j) << ',' << fmt_real(q.im_k) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

/// Reads a quaternion instance (A, y); dimensions are inferred from the
/// largest indices present, missing entries stay zero.
inline InstanceData read_instance_csv(const std::string& path) {
    std::ifstream in = detail::open_in(path);
    std::string line;
    int line_no = 1;
    if (!std::getline(in, line) || line != kInstanceCsvHeader) {
        throw CsvError(1, std::string("expected header '") + kInstanceCsvHeader + "'");
    }
    struct Entry {
        char kind;
        std::size_t row, col;
        Quaternion q;
    };
    std::vector<Entry> entries;
    std::size_t n = 0, m = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> f = detail::split_csv(line);
        if (f.size() != 7) throw CsvError(line_no, "expected 7 fields");
        if (f[0] != "A" && f[0] != "y") throw CsvError(line_no, "kind must be 'A' or 'y'");
        Entry e;
        e.kind = f[0][0];
        e.row = static_cast<std::size_t>(detail::parse_integer(f[1], line_no));
        e.col = static_cast<std::size_t>(detail::parse_integer(f[2], line_no));
        e.q = Quaternion(detail::parse_real(f[3], line_no), detail::parse_real(f[4], line_no),
                         detail::parse_real(f[5], line_no), detail::parse_real(f[6], line_no));
        n = std::max(n, e.row + 1);
        if (e.kind == 'A') m = std::max(m, e.col + 1);
        entries.push_back(e);
    }
    if (n == 0 || m == 0) throw CsvError(line_no, "instance has no measurements or no columns");
    InstanceData data{QMatrix(n, m), QVector(n)};
    for (const Entry& e : entries) {
        if (e.kind == 'A') {
            data.A(e.row, e.col) = e.q;
        } else {
            data.y[e.row] = e.q;
        }
    }
    return data;
}

struct SweepCsvRow {
    std::size_t m, n, s;
    int trials;
    int successes;
    double success_rate;
    double mean_error;
    double mean_solve_ms;
};

inline std::vector<SweepCsvRow> read_sweep_csv(const std::string& path) {
    std::ifstream in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != kSweepCsvHeader) {
        throw CsvError(1, std::string("expected header '") + kSweepCsvHeader + "'");
    }
    std::vector<SweepCsvRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> f = detail::split_csv(line);
        if (f.size() != 8) throw CsvError(line_no, "expected 8 fields");
        SweepCsvRow r;
        r.m = static_cast<std::size_t>(detail::parse_integer(f[0], line_no));
        r.n = static_cast<std::size_t>(detail::parse_integer(f[1], line_no));
        r.s = static_cast<std::size_t>(detail::parse_integer(f[2], line_no));
        r.trials = static_cast<int>(detail::parse_integer(f[3], line_no));
        r.successes = static_cast<int>(detail::parse_integer(f[4], line_no));
        r.success_rate = detail::parse_real(f[5], line_no);
        r.mean_error = detail::parse_real(f[6], line_no);
        r.mean_solve_ms = detail::parse_real(f[7], line_no);
        if (r.success_rate < 0.0 || r.success_rate > 1.0) {
            throw CsvError(line_no, "success_rate outside [0, 1]");
        }
        rows.push_back(r);
    }
    return rows;
}

struct HeatmapTable {
    std::size_t m = 0;
    std::vector<std::size_t> n_values;  // ascending
    std::vector<std::size_t> s_values;  // ascending
    std::vector<double> rates;          // n-major
};

/// Arranges sweep rows into a complete rectangular (n, s) table.
inline HeatmapTable build_heatmap(const std::vector<SweepCsvRow>& rows) {
    if (rows.empty()) throw std::runtime_error("empty sweep table");
    HeatmapTable t;
    t.m = rows.front().m;
    for (const SweepCsvRow& r : rows) {
        if (r.m != t.m) throw std::runtime_error("mixed values of m in sweep table");
        t.n_values.push_back(r.n);
        t.s_values.push_back(r.s);
    }
    auto uniq = [](std::vector<std::size_t>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(t.n_values);
    uniq(t.s_values);
    t.rates.assign(t.n_values.size() * t.s_values.size(), -1.0);
    for (const SweepCsvRow& r : rows) {
        const std::size_t ni = static_cast<std::size_t>(
            std::lower_bound(t.n_values.begin(), t.n_values.end(), r.n) - t.n_values.begin());
        const std::size_t si = static_cast<std::size_t>(
            std::lower_bound(t.s_values.begin(), t.s_values.end(), r.s) - t.s_values.begin());
        t.rates[ni * t.s_values.size() + si] = r.success_rate;
    }
    for (std::size_t i = 0; i < t.rates.size(); ++i) {
        if (t.rates[i] < 0.0) {
            throw std::runtime_error(
                "incomplete sweep grid: missing cell n=" +
                std::to_string(t.n_values[i / t.s_values.size()]) +
                " s=" + std::to_string(t.s_values[i % t.s_values.size()]));
        }
    }
    return t;
}

/// Renders the phase-transition heatmap: sparsity s on the horizontal axis,
/// measurement count n on the vertical axis, linear grayscale with white for
/// 100% success and black for 0%.
inline void write_heatmap_svg(const std::string& path, const HeatmapTable& t) {
    const std::size_t ns = t.s_values.size();
    const std::size_t nn = t.n_values.size();
    const int cell_w = static_cast<int>(std::clamp<std::size_t>(720 / ns, 8, 36));
    const int cell_h = static_cast<int>(std::clamp<std::size_t>(480 / nn, 8, 36));
    const int left = 72, top = 48, right = 96, bottom = 56;
    const int plot_w = cell_w * static_cast<int>(ns);
    const int plot_h = cell_h * static_cast<int>(nn);
    const int width = left + plot_w + right;
    const int height = top + plot_h + bottom;

    std::ofstream out = detail::open_out(path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<defs><linearGradient id=\"scale\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">"
        << "<stop offset=\"0\" stop-color=\"rgb(0,0,0)\"/>"
        << "<stop offset=\"1\" stop-color=\"rgb(255,255,255)\"/></linearGradient></defs>\n"
        << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
        << "<text x=\"" << left + plot_w / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">Recovery success rate (m=" << t.m
        << ")</text>\n";

    // Cells; n grows upward as on the phase-transition diagram.
    for (std::size_t ni = 0; ni < nn; ++ni) {
        for (std::size_t si = 0; si < ns; ++si) {
            const double rate = t.rates[ni * ns + si];
            const int v = static_cast<int>(std::lround(rate * 255.0));
            const int x = left + static_cast<int>(si) * cell_w;
            const int y = top + plot_h - static_cast<int>(ni + 1) * cell_h;
            out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w
                << "\" height=\"" << cell_h << "\" fill=\"rgb(" << v << ',' << v << ',' << v
                << ")\"/>\n";
        }
    }
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
        << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";

    // Axis tick labels, thinned to stay readable on dense grids.
    const std::size_t s_stride = std::max<std::size_t>(1, ns / 12);
    for (std::size_t si = 0; si < ns; si += s_stride) {
        out << "<text x=\"" << left + static_cast<int>(si) * cell_w + cell_w / 2 << "\" y=\""
            << top + plot_h + 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
            << "font-size=\"11\">" << t.s_values[si] << "</text>\n";
    }
    const std::size_t n_stride = std::max<std::size_t>(1, nn / 12);
    for (std::size_t ni = 0; ni < nn; ni += n_stride) {
        out << "<text x=\"" << left - 8 << "\" y=\""
            << top + plot_h - static_cast<int>(ni) * cell_h - cell_h / 2 + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << t.n_values[ni] << "</text>\n";
    }
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">sparsity s"
        << "</text>\n"
        << "<text x=\"18\" y=\"" << top + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << top + plot_h / 2 << ")\">measurements n</text>\n";

    // Legend: linear gray scale from 0% (black) to 100% (white).
    const int lx = left + plot_w + 24, lw = 16, lh = std::min(plot_h, 160);
    out << "<rect x=\"" << lx << "\" y=\"" << top << "\" width=\"" << lw << "\" height=\"" << lh
        << "\" fill=\"url(#scale)\" stroke=\"black\"/>\n"
        << "<text x=\"" << lx + lw + 6 << "\" y=\"" << top + 10
        << "\" font-family=\"sans-serif\" font-size=\"11\">100%</text>\n"
        << "<text x=\"" << lx + lw + 6 << "\" y=\"" << top + lh / 2 + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">50%</text>\n"
        << "<text x=\"" << lx + lw + 6 << "\" y=\"" << top + lh
        << "\" font-family=\"sans-serif\" font-size=\"11\">0%</text>\n"
        << "</svg>\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace qcs::io
