#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "nonlocal/errors.hpp"
#include "nonlocal/experiments.hpp"
#include "nonlocal/fixed_point.hpp"
#include "nonlocal/functionals.hpp"
#include "nonlocal/mesh.hpp"

namespace nonlocal::csv {

/// Shortest decimal string that parses back to the same double; locale-free.
inline std::string format_double(double v)
{
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{})
        throw Error("number formatting failed");
    return std::string(buf.data(), ptr);
}

inline double parse_double(std::string_view s)
{
    if (s == "nan" || s == "-nan")
        return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf")
        return std::numeric_limits<double>::infinity();
    if (s == "-inf")
        return -std::numeric_limits<double>::infinity();
    return detail::parse_number(s, "csv field");
}

/// Header, data rows and '#'-comment lines (without the leading "# ").
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> comments;
};

inline Table read_table(std::istream& in)
{
    Table t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line.front() == '#') {
            std::string_view c(line);
            c.remove_prefix(1);
            if (!c.empty() && c.front() == ' ')
                c.remove_prefix(1);
            t.comments.emplace_back(c);
            continue;
        }
        std::vector<std::string> fields;
        for (auto f : detail::split(line, ','))
            fields.emplace_back(f);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size())
            throw Error("csv row has " + std::to_string(fields.size()) + " fields, expected "
                        + std::to_string(t.header.size()));
        t.rows.push_back(std::move(fields));
    }
    return t;
}

namespace detail {

inline void expect_header(const Table& t, std::initializer_list<std::string_view> cols)
{
    std::vector<std::string> want(cols.begin(), cols.end());
    if (t.header != want)
        throw Error("unexpected csv header");
}

// Value of "key=value" inside comments like "slope_u=1, slope_mu=2".
inline std::optional<std::string> comment_value(const Table& t, std::string_view key)
{
    for (const auto& c : t.comments) {
        for (auto part : nonlocal::detail::split(c, ',')) {
            while (!part.empty() && part.front() == ' ')
                part.remove_prefix(1);
            const auto eq = part.find('=');
            if (eq != std::string_view::npos && part.substr(0, eq) == key)
                return std::string(part.substr(eq + 1));
        }
    }
    return std::nullopt;
}

}  // namespace detail

/// step,x,residual; step 0 carries an empty residual. Trailing "# status=...".
inline void write_trace(std::ostream& out, const FixedPointTrace& trace)
{
    out << "step,x,residual\n";
    for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
        out << k << ',' << format_double(trace.iterates[k]) << ',';
        if (k > 0)
            out << format_double(trace.residuals[k - 1]);
        out << '\n';
    }
    out << "# status=" << to_string(trace.status) << '\n';
}

inline FixedPointTrace read_trace(std::istream& in)
{
    const auto t = read_table(in);
    detail::expect_header(t, {"step", "x", "residual"});
    FixedPointTrace trace;
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto& r = t.rows[k];
        trace.iterates.push_back(parse_double(r[1]));
        if (k > 0)
            trace.residuals.push_back(parse_double(r[2]));
    }
    if (auto s = detail::comment_value(t, "status")) {
        for (auto st : {TraceStatus::Converged, TraceStatus::MaxIterations, TraceStatus::TwoCycle,
                        TraceStatus::Blowup})
            if (*s == to_string(st))
                trace.status = st;
    }
    return trace;
}

inline void write_sweep(std::ostream& out, std::span<const SweepRow> rows)
{
    out << "mu,G\n";
    for (const auto& r : rows)
        out << format_double(r.mu) << ',' << format_double(r.G) << '\n';
}

inline std::vector<SweepRow> read_sweep(std::istream& in)
{
    const auto t = read_table(in);
    detail::expect_header(t, {"mu", "G"});
    std::vector<SweepRow> rows;
    for (const auto& r : t.rows)
        rows.push_back({parse_double(r[0]), parse_double(r[1])});
    return rows;
}

inline void write_study(std::ostream& out, const HStudyResult& study)
{
    out << "h,max_deriv_error,mu_error,iterations\n";
    for (const auto& r : study.records)
        out << format_double(r.h) << ',' << format_double(r.max_deriv_error) << ','
            << format_double(r.mu_error) << ',' << r.iterations << '\n';
    out << "# slope_u=" << format_double(study.derivative_fit.slope)
        << ", slope_mu=" << format_double(study.mu_fit.slope) << '\n';
}

struct StudyCsv {
    std::vector<ConvergenceRecord> records;
    double slope_u = 0.0;
    double slope_mu = 0.0;
};

inline StudyCsv read_study(std::istream& in)
{
    const auto t = read_table(in);
    detail::expect_header(t, {"h", "max_deriv_error", "mu_error", "iterations"});
    StudyCsv out;
    for (const auto& r : t.rows) {
        ConvergenceRecord rec;
        rec.h = parse_double(r[0]);
        rec.max_deriv_error = parse_double(r[1]);
        rec.mu_error = parse_double(r[2]);
        rec.iterations = static_cast<std::size_t>(parse_double(r[3]));
        out.records.push_back(rec);
    }
    const auto su = detail::comment_value(t, "slope_u");
    const auto sm = detail::comment_value(t, "slope_mu");
    if (!su || !sm)
        throw Error("study csv lacks the slope comment line");
    out.slope_u = parse_double(*su);
    out.slope_mu = parse_double(*sm);
    return out;
}

/// x,u at every mesh node including the two boundary nodes.
inline void write_solution(std::ostream& out, const FeFunction& u)
{
    out << "x,u\n";
    const auto& mesh = u.mesh();
    for (std::size_t i = 0; i < mesh.n_interior() + 2; ++i)
        out << format_double(mesh.node(i)) << ',' << format_double(u.nodal(i)) << '\n';
}

inline std::vector<std::pair<double, double>> read_solution(std::istream& in)
{
    const auto t = read_table(in);
    detail::expect_header(t, {"x", "u"});
    std::vector<std::pair<double, double>> rows;
    for (const auto& r : t.rows)
        rows.emplace_back(parse_double(r[0]), parse_double(r[1]));
    return rows;
}

}  // namespace nonlocal::csv
