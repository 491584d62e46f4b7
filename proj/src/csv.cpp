#include "stablekern/csv.hpp"

#include "stablekern/errors.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

namespace stablekern::io {

using Eigen::Index;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        out.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_number(const std::string& text, std::size_t line_no) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || text.empty()) {
        fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": '" + text + "' is not a number");
    }
    return v;
}

bool is_blank(const std::string& line) {
    return trim(line).empty();
}

Index parse_index(const std::string& text, std::size_t line_no) {
    const double v = parse_number(text, line_no);
    if (v != std::floor(v) || v < 1.0 || v > 1e9) {
        fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": '" + text + "' is not a positive index");
    }
    return static_cast<Index>(v);
}

// Reads all non-blank lines; drops the first if it matches a non-empty `header`.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_rows(std::istream& is, const std::string& header,
                                                                        std::size_t width) {
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(is, line)) {
        ++line_no;
        if (is_blank(line)) {
            continue;
        }
        auto fields = split_fields(line);
        if (first && !header.empty()) {
            first = false;
            std::string joined;
            for (std::size_t i = 0; i < fields.size(); ++i) {
                joined += (i ? "," : "") + fields[i];
            }
            if (joined == header) {
                continue;
            }
        }
        if (width != 0 && fields.size() != width) {
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                                       " fields, found " + std::to_string(fields.size()));
        }
        rows.emplace_back(line_no, std::move(fields));
    }
    return rows;
}

std::string label_or_empty(bool used, double v) {
    return used ? format_number(v) : std::string();
}

}  // namespace

std::string format_number(double v) {
    if (v == 0.0) {
        return "0";
    }
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            os << (j ? "," : "") << format_number(m(i, j));
        }
        os << '\n';
    }
}

Eigen::MatrixXd read_matrix_csv(std::istream& is) {
    const auto rows = read_rows(is, "", 0);
    if (rows.empty()) {
        fail(ErrorCode::Parse, "matrix CSV is empty");
    }
    const std::size_t cols = rows.front().second.size();
    Eigen::MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& [line_no, fields] = rows[i];
        if (fields.size() != cols) {
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": ragged matrix row");
        }
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Index>(i), static_cast<Index>(j)) = parse_number(fields[j], line_no);
        }
    }
    return m;
}

void write_bands_csv(std::ostream& os, const BandSpec& bands) {
    os << "t,s,value\n";
    for (Index t = 0; t < bands.dim(); ++t) {
        for (Index s = std::max<Index>(0, t - bands.bandwidth()); s <= t; ++s) {
            os << t + 1 << ',' << s + 1 << ',' << format_number(bands(t, s)) << '\n';
        }
    }
}

BandSpec read_bands_csv(std::istream& is) {
    const auto rows = read_rows(is, "t,s,value", 3);
    if (rows.empty()) {
        fail(ErrorCode::Parse, "band CSV has no entries");
    }
    std::map<std::pair<Index, Index>, double> entries;
    Index dim = 0;
    Index bandwidth = 0;
    for (const auto& [line_no, f] : rows) {
        Index t = parse_index(f[0], line_no);
        Index s = parse_index(f[1], line_no);
        if (t < s) {
            std::swap(t, s);
        }
        if (!entries.emplace(std::make_pair(t, s), parse_number(f[2], line_no)).second) {
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": duplicate band entry");
        }
        dim = std::max(dim, t);
        bandwidth = std::max(bandwidth, t - s);
    }
    const auto expected = static_cast<std::size_t>((bandwidth + 1) * dim - bandwidth * (bandwidth + 1) / 2);
    if (entries.size() != expected) {
        fail(ErrorCode::Parse, "band CSV is incomplete: " + std::to_string(entries.size()) + " of " +
                                   std::to_string(expected) + " entries for T = " + std::to_string(dim) +
                                   ", m = " + std::to_string(bandwidth));
    }
    BandSpec bands(dim, bandwidth);
    for (const auto& [key, value] : entries) {
        bands.set(key.first - 1, key.second - 1, value);
    }
    return bands;
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
    os << "t,u,y\n";
    for (Index i = 0; i < data.u.size(); ++i) {
        os << i + 1 << ',' << format_number(data.u(i)) << ',' << format_number(data.y(i)) << '\n';
    }
}

Dataset read_dataset_csv(std::istream& is) {
    const auto rows = read_rows(is, "t,u,y", 3);
    if (rows.empty()) {
        fail(ErrorCode::Parse, "dataset CSV has no samples");
    }
    Dataset data;
    data.u.resize(static_cast<Index>(rows.size()));
    data.y.resize(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& [line_no, f] = rows[i];
        if (parse_index(f[0], line_no) != static_cast<Index>(i + 1)) {
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": time index must run 1, 2, ...");
        }
        data.u(static_cast<Index>(i)) = parse_number(f[1], line_no);
        data.y(static_cast<Index>(i)) = parse_number(f[2], line_no);
    }
    return data;
}

void write_psd_csv(std::ostream& os, const Psd& spectrum) {
    os << "theta,phi\n";
    for (std::size_t i = 0; i < spectrum.theta.size(); ++i) {
        os << format_number(spectrum.theta[i]) << ',' << format_number(spectrum.phi[i]) << '\n';
    }
}

void write_mc_csv(std::ostream& os, const MCResult& result) {
    os << "run,estimator,airf,beta,alpha,delta,gamma,lambda,sigma2,seconds\n";
    const double nan = std::nan("");
    for (const auto& rec : result.records) {
        const Family f = rec.estimator.family;
        const KernelSpec& k = rec.fitted;
        os << rec.run + 1 << ',' << family_label(rec.estimator) << ',' << format_number(rec.ok ? rec.airf : nan)
           << ',' << label_or_empty(f != Family::SS, rec.ok ? k.beta : nan) << ','
           << label_or_empty(uses_alpha(f), rec.ok ? k.alpha : nan) << ','
           << (uses_delta(f) ? std::to_string(rec.estimator.delta) : std::string()) << ','
           << label_or_empty(f == Family::SS, rec.ok ? k.gamma : nan) << ','
           << format_number(rec.ok ? rec.lambda : nan) << ',' << format_number(rec.ok ? rec.sigma2 : nan) << ','
           << format_number(rec.seconds) << '\n';
    }
}

std::string estimate_to_json(const EstimateResult& result, int indent) {
    const Family f = result.kernel.family;
    nlohmann::ordered_json j;
    j["family"] = family_label(result.kernel);
    j["beta"] = f == Family::SS ? nlohmann::ordered_json() : nlohmann::ordered_json(result.kernel.beta);
    j["alpha"] = uses_alpha(f) ? nlohmann::ordered_json(result.kernel.alpha) : nlohmann::ordered_json();
    j["delta"] = uses_delta(f) ? nlohmann::ordered_json(result.kernel.delta) : nlohmann::ordered_json();
    j["gamma"] = f == Family::SS ? nlohmann::ordered_json(result.kernel.gamma) : nlohmann::ordered_json();
    j["lambda"] = result.lambda;
    j["sigma2"] = result.sigma2;
    j["nll"] = result.nll;
    j["g_hat"] = std::vector<double>(result.g_hat.data(), result.g_hat.data() + result.g_hat.size());
    return j.dump(indent);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::Io, "cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace stablekern::io
