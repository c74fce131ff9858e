#include "sslsurv/dataset.hpp"

#include "sslsurv/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sslsurv {

namespace {

std::string row_tag(std::size_t i)
{
    return "row " + std::to_string(i + 1);
}

} // namespace

Dataset::Dataset(const std::vector<Subject>& subjects)
{
    const std::size_t N = subjects.size();
    const std::size_t p = N ? static_cast<std::size_t>(subjects[0].Z.size()) : 0;
    const std::size_t K = N ? static_cast<std::size_t>(subjects[0].X.size()) : 0;
    ids_.reserve(N);
    labeled_.reserve(N);
    delta_.reserve(N);
    C_.resize(N);
    Z_.resize(N, p);
    X_.resize(N, K);
    D_.resize(N, K);
    for (std::size_t i = 0; i < N; ++i) {
        const Subject& s = subjects[i];
        require(static_cast<std::size_t>(s.Z.size()) == p,
                ErrorKind::parse, row_tag(i) + ": covariate length differs");
        require(static_cast<std::size_t>(s.X.size()) == K && s.D.size() == K,
                ErrorKind::parse, row_tag(i) + ": surrogate length differs");
        require(s.labeled == s.delta.has_value(), ErrorKind::parse,
                row_tag(i) + ": delta must be present exactly on labeled rows");
        ids_.push_back(s.id);
        labeled_.push_back(s.labeled ? 1 : 0);
        delta_.push_back(s.delta.value_or(-1));
        C_(i) = s.C;
        Z_.row(i) = s.Z.transpose();
        X_.row(i) = s.X.transpose();
        for (std::size_t k = 0; k < K; ++k) {
            D_(i, k) = s.D[k];
        }
    }
    validate();
}

Dataset::Dataset(std::vector<std::string> ids,
                 std::vector<std::uint8_t> labeled, std::vector<int> delta,
                 Vector C, Matrix Z, Matrix X, IntMatrix D)
    : ids_(std::move(ids)), labeled_(std::move(labeled)),
      delta_(std::move(delta)), C_(std::move(C)), Z_(std::move(Z)),
      X_(std::move(X)), D_(std::move(D))
{
    const auto N = static_cast<Eigen::Index>(ids_.size());
    require(labeled_.size() == ids_.size() && delta_.size() == ids_.size() &&
                C_.size() == N && Z_.rows() == N && X_.rows() == N &&
                D_.rows() == N && D_.cols() == X_.cols(),
            ErrorKind::invalid_argument, "Dataset: column lengths differ");
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!labeled_[i]) {
            delta_[i] = -1;
        }
    }
    validate();
}

void Dataset::validate()
{
    n_labeled_ = 0;
    labeled_rows_.clear();
    for (std::size_t i = 0; i < N(); ++i) {
        require(labeled_[i] <= 1, ErrorKind::parse,
                row_tag(i) + ": labeled must be 0 or 1");
        if (labeled_[i]) {
            require(delta_[i] == 0 || delta_[i] == 1, ErrorKind::parse,
                    row_tag(i) + ": delta must be 0 or 1 on labeled rows");
            ++n_labeled_;
            labeled_rows_.push_back(i);
        }
        require(std::isfinite(C_(i)) && C_(i) > 0.0, ErrorKind::parse,
                row_tag(i) + ": C must be finite and positive");
        for (Eigen::Index j = 0; j < Z_.cols(); ++j) {
            require(std::isfinite(Z_(i, j)), ErrorKind::parse,
                    row_tag(i) + ": Z" + std::to_string(j + 1) +
                        " must be finite");
        }
        for (Eigen::Index k = 0; k < X_.cols(); ++k) {
            const std::string col = std::to_string(k + 1);
            require(D_(i, k) == 0 || D_(i, k) == 1, ErrorKind::parse,
                    row_tag(i) + ": D" + col + " must be 0 or 1");
            require(std::isfinite(X_(i, k)), ErrorKind::parse,
                    row_tag(i) + ": X" + col + " must be finite");
            require(X_(i, k) <= C_(i), ErrorKind::parse,
                    row_tag(i) + ": X" + col + " > C violates X_k <= C");
            require(D_(i, k) == 1 || X_(i, k) == C_(i), ErrorKind::parse,
                    row_tag(i) + ": D" + col + " = 0 requires X" + col +
                        " = C");
        }
    }
}

Subject Dataset::subject(std::size_t i) const
{
    Subject s;
    s.id = ids_[i];
    s.labeled = labeled(i);
    if (s.labeled) {
        s.delta = delta_[i];
    }
    s.C = C_(i);
    s.Z = Z_.row(i).transpose();
    s.X = X_.row(i).transpose();
    s.D.resize(K());
    for (std::size_t k = 0; k < K(); ++k) {
        s.D[k] = D_(i, k);
    }
    return s;
}

Dataset Dataset::permuted(const std::vector<std::size_t>& order) const
{
    require(order.size() == N(), ErrorKind::invalid_argument,
            "permuted: order has wrong length");
    return subset(order);
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const
{
    const auto M = static_cast<Eigen::Index>(rows.size());
    std::vector<std::string> ids(rows.size());
    std::vector<std::uint8_t> lab(rows.size());
    std::vector<int> delta(rows.size());
    Vector C(M);
    Matrix Z(M, Z_.cols());
    Matrix X(M, X_.cols());
    IntMatrix D(M, D_.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t i = rows[r];
        require(i < N(), ErrorKind::invalid_argument, "subset: row out of range");
        ids[r] = ids_[i];
        lab[r] = labeled_[i];
        delta[r] = delta_[i];
        C(r) = C_(i);
        Z.row(r) = Z_.row(i);
        X.row(r) = X_.row(i);
        D.row(r) = D_.row(i);
    }
    return Dataset(std::move(ids), std::move(lab), std::move(delta),
                   std::move(C), std::move(Z), std::move(X), std::move(D));
}

Dataset Dataset::with_covariates(Matrix Z) const
{
    require(Z.rows() == Z_.rows() && Z.cols() == Z_.cols(),
            ErrorKind::invalid_argument, "with_covariates: shape mismatch");
    return Dataset(ids_, labeled_, delta_, C_, std::move(Z), X_, D_);
}

bool Dataset::operator==(const Dataset& other) const
{
    return ids_ == other.ids_ && labeled_ == other.labeled_ &&
           delta_ == other.delta_ && C_ == other.C_ && Z_ == other.Z_ &&
           X_ == other.X_ && D_ == other.D_;
}

// -- CSV ---------------------------------------------------------------------

namespace {

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_real(const std::string& field, std::size_t line,
                  const std::string& column)
{
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || field.empty()) {
        fail(ErrorKind::parse, "line " + std::to_string(line) + ": column " +
                                   column + " is not a number ('" + field +
                                   "')");
    }
    return value;
}

int parse_binary(const std::string& field, std::size_t line,
                 const std::string& column)
{
    if (field == "0" || field == "false") {
        return 0;
    }
    if (field == "1" || field == "true") {
        return 1;
    }
    fail(ErrorKind::parse, "line " + std::to_string(line) + ": column " +
                               column + " must be 0 or 1 ('" + field + "')");
}

std::string format_real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

Dataset parse_dataset(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        fail(ErrorKind::parse, "line 1: missing header");
    }
    const auto header = split_fields(line);
    require(header.size() >= 4 && header[0] == "id" &&
                header[1] == "labeled" && header[2] == "delta" &&
                header[3] == "C",
            ErrorKind::parse,
            "line 1: header must start with id,labeled,delta,C");
    std::size_t p = 0;
    while (4 + p < header.size() && header[4 + p] == "Z" + std::to_string(p + 1)) {
        ++p;
    }
    const std::size_t rest = header.size() - 4 - p;
    require(p >= 1, ErrorKind::parse, "line 1: missing column Z1");
    require(rest % 2 == 0, ErrorKind::parse,
            "line 1: surrogate columns must come in X/D pairs");
    const std::size_t K = rest / 2;
    for (std::size_t k = 0; k < K; ++k) {
        require(header[4 + p + k] == "X" + std::to_string(k + 1),
                ErrorKind::parse,
                "line 1: missing column X" + std::to_string(k + 1));
        require(header[4 + p + K + k] == "D" + std::to_string(k + 1),
                ErrorKind::parse,
                "line 1: missing column D" + std::to_string(k + 1));
    }

    std::vector<Subject> subjects;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto f = split_fields(line);
        const std::string where = "line " + std::to_string(lineno);
        require(f.size() == header.size(), ErrorKind::parse,
                where + ": expected " + std::to_string(header.size()) +
                    " fields, found " + std::to_string(f.size()));
        Subject s;
        s.id = f[0];
        s.labeled = parse_binary(f[1], lineno, "labeled") == 1;
        if (s.labeled) {
            require(!f[2].empty(), ErrorKind::parse,
                    where + ": labeled row is missing delta");
            s.delta = parse_binary(f[2], lineno, "delta");
        } else {
            require(f[2].empty(), ErrorKind::parse,
                    where + ": delta given on an unlabeled row");
        }
        s.C = parse_real(f[3], lineno, "C");
        s.Z.resize(p);
        for (std::size_t j = 0; j < p; ++j) {
            s.Z(j) = parse_real(f[4 + j], lineno, header[4 + j]);
        }
        s.X.resize(K);
        s.D.resize(K);
        for (std::size_t k = 0; k < K; ++k) {
            s.X(k) = parse_real(f[4 + p + k], lineno, header[4 + p + k]);
            s.D[k] = parse_binary(f[4 + p + K + k], lineno, header[4 + p + K + k]);
        }
        require(std::isfinite(s.C) && s.C > 0.0, ErrorKind::parse,
                where + ": C must be finite and positive");
        for (std::size_t k = 0; k < K; ++k) {
            const std::string col = std::to_string(k + 1);
            require(s.X(k) <= s.C, ErrorKind::parse,
                    where + ": X" + col + " > C violates X_k <= C");
            require(s.D[k] == 1 || s.X(k) == s.C, ErrorKind::parse,
                    where + ": D" + col + " = 0 requires X" + col + " = C");
        }
        subjects.push_back(std::move(s));
    }
    if (subjects.empty()) {
        Dataset empty(std::vector<std::string>{}, {}, {}, Vector(0),
                      Matrix(0, p), Matrix(0, K), IntMatrix(0, K));
        return empty;
    }
    return Dataset(subjects);
}

Dataset load_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::parse,
            "cannot open dataset '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str());
}

std::string format_dataset(const Dataset& data)
{
    std::string out = "id,labeled,delta,C";
    for (std::size_t j = 0; j < data.p(); ++j) {
        out += ",Z" + std::to_string(j + 1);
    }
    for (std::size_t k = 0; k < data.K(); ++k) {
        out += ",X" + std::to_string(k + 1);
    }
    for (std::size_t k = 0; k < data.K(); ++k) {
        out += ",D" + std::to_string(k + 1);
    }
    out += '\n';
    for (std::size_t i = 0; i < data.N(); ++i) {
        out += data.id(i);
        out += data.labeled(i) ? ",1," : ",0,";
        if (data.labeled(i)) {
            out += std::to_string(data.delta(i));
        }
        out += ',' + format_real(data.C()(i));
        for (std::size_t j = 0; j < data.p(); ++j) {
            out += ',' + format_real(data.Z()(i, j));
        }
        for (std::size_t k = 0; k < data.K(); ++k) {
            out += ',' + format_real(data.X()(i, k));
        }
        for (std::size_t k = 0; k < data.K(); ++k) {
            out += ',' + std::to_string(data.D()(i, k));
        }
        out += '\n';
    }
    return out;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::invalid_argument,
            "cannot write dataset '" + path.string() + "'");
    out << format_dataset(data);
}

// -- regime ------------------------------------------------------------------

std::string to_string(Regime regime)
{
    switch (regime) {
    case Regime::comparable:
        return "comparable";
    case Regime::large_unlabeled:
        return "large_unlabeled";
    case Regime::automatic:
        return "auto";
    }
    return "auto";
}

Regime regime_from_string(const std::string& name)
{
    if (name == "comparable") {
        return Regime::comparable;
    }
    if (name == "large_unlabeled" || name == "large") {
        return Regime::large_unlabeled;
    }
    if (name == "auto") {
        return Regime::automatic;
    }
    fail(ErrorKind::invalid_argument, "unknown regime '" + name + "'");
}

Regime resolve_regime(const Dataset& data, const RegimeConfig& config)
{
    require(config.rho_threshold > 0.0 && config.rho_threshold < 1.0,
            ErrorKind::invalid_argument, "rho threshold must lie in (0, 1)");
    if (config.regime != Regime::automatic) {
        return config.regime;
    }
    require(data.N() > 0, ErrorKind::degenerate_data,
            "resolve_regime: empty dataset");
    const double rho =
        static_cast<double>(data.n()) / static_cast<double>(data.N());
    return rho < config.rho_threshold ? Regime::large_unlabeled
                                      : Regime::comparable;
}

} // namespace sslsurv
