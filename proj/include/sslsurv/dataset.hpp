#pragma once

#include "sslsurv/numerics.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sslsurv {

using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

//! One row of the cohort. The latent event time is never stored.
struct Subject
{
    std::string id;
    bool labeled = false;
    std::optional<int> delta; // current status, present iff labeled
    double C = 0.0;           // follow-up time
    Vector Z;                 // baseline covariates, length p
    Vector X;                 // surrogate times min(T_k, C), length K
    std::vector<int> D;       // surrogate event indicators, length K
};

//! Immutable, validated cohort of labeled and unlabeled subjects, stored
//! column-wise.
class Dataset
{
public:
    Dataset() = default;
    explicit Dataset(const std::vector<Subject>& subjects);
    //! Column form; delta entries for unlabeled rows are ignored and
    //! stored as missing.
    Dataset(std::vector<std::string> ids, std::vector<std::uint8_t> labeled,
            std::vector<int> delta, Vector C, Matrix Z, Matrix X,
            IntMatrix D);

    std::size_t N() const noexcept { return ids_.size(); }
    std::size_t n() const noexcept { return n_labeled_; }
    std::size_t p() const noexcept { return static_cast<std::size_t>(Z_.cols()); }
    std::size_t K() const noexcept { return static_cast<std::size_t>(X_.cols()); }

    const std::string& id(std::size_t i) const { return ids_[i]; }
    bool labeled(std::size_t i) const { return labeled_[i] != 0; }
    //! Current status of a labeled row; -1 for unlabeled rows.
    int delta(std::size_t i) const { return delta_[i]; }

    const Vector& C() const noexcept { return C_; }
    const Matrix& Z() const noexcept { return Z_; }
    const Matrix& X() const noexcept { return X_; }
    const IntMatrix& D() const noexcept { return D_; }

    //! Row indices of labeled subjects in row order.
    const std::vector<std::size_t>& labeled_rows() const noexcept
    {
        return labeled_rows_;
    }

    Subject subject(std::size_t i) const;

    //! Same subjects in a new order (row i of the result is row order[i]).
    Dataset permuted(const std::vector<std::size_t>& order) const;
    //! Subset of rows, order preserved as given.
    Dataset subset(const std::vector<std::size_t>& rows) const;
    //! Copy with Z replaced (same shape).
    Dataset with_covariates(Matrix Z) const;

    bool operator==(const Dataset& other) const;

private:
    void validate();

    std::vector<std::string> ids_;
    std::vector<std::uint8_t> labeled_;
    std::vector<int> delta_;
    Vector C_;
    Matrix Z_;
    Matrix X_;
    IntMatrix D_;
    std::size_t n_labeled_ = 0;
    std::vector<std::size_t> labeled_rows_;
};

//! Reads the cohort CSV: header `id,labeled,delta,C,Z1..Zp,X1..XK,D1..DK`.
Dataset load_dataset(const std::filesystem::path& path);
Dataset parse_dataset(const std::string& text);

//! Writes the cohort CSV with 17 significant digits.
void save_dataset(const Dataset& data, const std::filesystem::path& path);
std::string format_dataset(const Dataset& data);

enum class Regime { comparable, large_unlabeled, automatic };

std::string to_string(Regime regime);
Regime regime_from_string(const std::string& name);

struct RegimeConfig
{
    Regime regime = Regime::automatic;
    double rho_threshold = 0.1;
};

//! Resolves `automatic` to large_unlabeled iff n / N < rho_threshold.
Regime resolve_regime(const Dataset& data, const RegimeConfig& config);

} // namespace sslsurv
