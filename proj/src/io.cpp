#include "freqid/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace freqid {

namespace {

json cplx_to_json(cplx v) { return json::array({v.real(), v.imag()}); }

cplx cplx_from_json(const json &j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw Error(ErrorCode::ParseError, "complex value must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<double> reals_from_json(const json &j, const char *what) {
    if (!j.is_array())
        throw Error(ErrorCode::ParseError, std::string(what) + " must be an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto &x : j) {
        if (!x.is_number())
            throw Error(ErrorCode::ParseError, std::string(what) + " must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

const json &field(const json &j, const char *key) {
    if (!j.is_object() || !j.contains(key))
        throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
    return j.at(key);
}

json real_vector(const Eigen::VectorXd &v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

} // namespace

json complex_vector_to_json(const Eigen::VectorXcd &v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(cplx_to_json(v[i]));
    return out;
}

Eigen::VectorXcd complex_vector_from_json(const json &j) {
    if (!j.is_array())
        throw Error(ErrorCode::ParseError, "complex vector must be an array");
    Eigen::VectorXcd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = cplx_from_json(j[i]);
    return v;
}

json model_to_json(const Model &m) {
    if (const auto *tf = std::get_if<TransferFunction>(&m))
        return json{{"num", tf->num}, {"den", tf->den}};
    const auto &ss = std::get<StateSpace>(m);
    json A = json::array();
    for (Eigen::Index r = 0; r < ss.A.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < ss.A.cols(); ++c)
            row.push_back(ss.A(r, c));
        A.push_back(row);
    }
    return json{{"A", A}, {"B", real_vector(ss.B)}, {"C", real_vector(ss.C.transpose())}, {"D", ss.D}};
}

Model model_from_json(const json &j) {
    if (j.is_object() && j.contains("num")) {
        TransferFunction tf{reals_from_json(field(j, "num"), "num"), reals_from_json(field(j, "den"), "den")};
        tf.validate();
        return tf;
    }
    const json &A = field(j, "A");
    if (!A.is_array())
        throw Error(ErrorCode::ParseError, "A must be a list of rows");
    const auto n = static_cast<Eigen::Index>(A.size());
    StateSpace ss;
    ss.A.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto row = reals_from_json(A[static_cast<std::size_t>(r)], "A row");
        if (static_cast<Eigen::Index>(row.size()) != n)
            throw Error(ErrorCode::DimensionMismatch, "A must be square");
        for (Eigen::Index c = 0; c < n; ++c)
            ss.A(r, c) = row[static_cast<std::size_t>(c)];
    }
    const auto B = reals_from_json(field(j, "B"), "B");
    const auto C = reals_from_json(field(j, "C"), "C");
    ss.B = Eigen::Map<const Eigen::VectorXd>(B.data(), static_cast<Eigen::Index>(B.size()));
    ss.C = Eigen::Map<const Eigen::RowVectorXd>(C.data(), static_cast<Eigen::Index>(C.size()));
    const json &D = field(j, "D");
    if (!D.is_number())
        throw Error(ErrorCode::ParseError, "D must be a number");
    ss.D = D.get<double>();
    ss.validate();
    return ss;
}

json measurements_to_json(const MeasurementSet &ms) {
    json W = json::array();
    for (Eigen::Index r = 0; r < ms.W.rows(); ++r)
        W.push_back(complex_vector_to_json(ms.W.row(r).transpose()));
    return json{{"z", complex_vector_to_json(ms.grid.points())}, {"W", W}};
}

MeasurementSet measurements_from_json(const json &j) {
    const Eigen::VectorXcd z = complex_vector_from_json(field(j, "z"));
    const json &W = field(j, "W");
    if (!W.is_array() || static_cast<Eigen::Index>(W.size()) != z.size())
        throw Error(ErrorCode::DimensionMismatch, "W needs one row per frequency point");
    std::vector<double> thetas;
    double margin = pi;
    for (Eigen::Index r = 0; r < z.size(); ++r) {
        if (std::abs(std::abs(z[r]) - 1.0) > 1e-9)
            throw Error(ErrorCode::InvalidRange, "frequency points must lie on the unit circle");
        const double t = std::arg(z[r]);
        thetas.push_back(t);
        margin = std::min({margin, t, pi - t});
    }
    MeasurementSet ms;
    ms.grid = FrequencyGrid(thetas, margin);
    const std::size_t N = z.size() ? W[0].size() : 0;
    ms.W.resize(z.size(), static_cast<Eigen::Index>(N));
    for (Eigen::Index r = 0; r < z.size(); ++r) {
        const Eigen::VectorXcd row = complex_vector_from_json(W[static_cast<std::size_t>(r)]);
        if (static_cast<std::size_t>(row.size()) != N)
            throw Error(ErrorCode::DimensionMismatch, "every W row needs the same number of experiments");
        ms.W.row(r) = row.transpose();
    }
    return ms;
}

json solve_result_to_json(const SolveResult &r) {
    return json{{"w_hat", complex_vector_to_json(r.w_hat)},
                {"iterations", r.iterations},
                {"cert_dual_norm", r.cert_dual_norm},
                {"cert_gap", r.cert_gap},
                {"converged", r.converged},
                {"multiplier_dual_norm", r.multiplier_dual_norm},
                {"primal_residual", r.primal_residual},
                {"dual_residual", r.dual_residual}};
}

json realization_to_json(const Realization &r) {
    json j = model_to_json(r.ss);
    j["order"] = r.order;
    j["singular_values"] = real_vector(r.singular_values);
    j["interpolation_error"] = r.interpolation_error;
    return j;
}

json bounds_summary_to_json(const BoundsSummary &s) {
    return json{{"eps_sampled", s.eps_sampled}, {"tau_star", s.tau_star},
                {"alpha_at_tau_star", s.alpha_at_tau_star}, {"phi_lower", s.phi_lower},
                {"noise_bound", s.noise_bound}, {"delta_bar", s.delta_bar},
                {"psi", s.psi}, {"eps_all_freq", s.eps_all_freq}};
}

json validation_to_json(const ValidationReport &r) {
    json checks = json::array();
    for (const auto &c : r.checks)
        checks.push_back(json{{"name", c.name}, {"delta_m", c.delta_m}, {"M", c.M}, {"lhs", c.lhs},
                              {"rhs", c.rhs}, {"passed", c.passed}, {"detail", c.detail}});
    return json{{"all_passed", r.all_passed()}, {"checks", checks}};
}

json sweep_summary_to_json(const SweepResult &r) {
    return json{{"variable", to_string(r.variable)}, {"values", r.values},
                {"median_hinf_lnnm", r.median_lnnm}, {"median_hinf_avg", r.median_avg},
                {"slope_lnnm", r.slope_lnnm}, {"slope_avg", r.slope_avg}};
}

json read_json_file(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    try {
        return json::parse(is);
    } catch (const json::exception &e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
}

void write_json_file(const std::string &path, const json &j) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    os << j.dump(2) << '\n';
    if (!os)
        throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

} // namespace freqid
