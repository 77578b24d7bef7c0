#include "botdetect/metrics.hpp"

#include <ostream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace botdetect {

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix ConfusionMatrix::swapped() const {
    return {tn, tp, fn, fp, positive_class == kAttack ? kNormal : kAttack};
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int positive_class) {
    if (y_true.size() != y_pred.size()) throw std::invalid_argument("confusion: label vectors differ in length");
    if (y_true.empty()) throw std::invalid_argument("confusion: no labels");
    ConfusionMatrix cm;
    cm.positive_class = positive_class;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool actual = y_true[i] == positive_class;
        const bool predicted = y_pred[i] == positive_class;
        if (actual && predicted) ++cm.tp;
        else if (actual) ++cm.fn;
        else if (predicted) ++cm.fp;
        else ++cm.tn;
    }
    return cm;
}

ClassMetrics class_metrics(const ConfusionMatrix& cm) {
    ClassMetrics m;
    m.accuracy = ratio(cm.tp + cm.tn, cm.total());
    m.precision = ratio(cm.tp, cm.tp + cm.fp);
    m.recall = ratio(cm.tp, cm.tp + cm.fn);
    const double pr = m.precision + m.recall;
    m.f_score = pr > 0.0 ? 2.0 * m.precision * m.recall / pr : 0.0;
    return m;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw std::invalid_argument("compute_metrics: empty confusion matrix");
    const ClassMetrics pos = class_metrics(cm);
    MetricsReport r;
    r.cm = cm;
    r.accuracy = pos.accuracy;
    r.precision = pos.precision;
    r.recall = pos.recall;
    r.f_score = pos.f_score;
    r.negative = class_metrics(cm.swapped());
    r.macro_precision = 0.5 * (r.precision + r.negative.precision);
    r.macro_recall = 0.5 * (r.recall + r.negative.recall);
    r.macro_f_score = 0.5 * (r.f_score + r.negative.f_score);
    return r;
}

void write_metrics(std::ostream& out, const std::string& prefix, const MetricsReport& m) {
    const auto other = m.cm.positive_class == kAttack ? "normal" : "attack";
    const auto self = m.cm.positive_class == kAttack ? "attack" : "normal";
    const auto old = out.precision(10);
    out << prefix << ".tp = " << m.cm.tp << '\n'
        << prefix << ".tn = " << m.cm.tn << '\n'
        << prefix << ".fp = " << m.cm.fp << '\n'
        << prefix << ".fn = " << m.cm.fn << '\n'
        << prefix << ".accuracy = " << m.accuracy << '\n'
        << prefix << '.' << self << ".precision = " << m.precision << '\n'
        << prefix << '.' << self << ".recall = " << m.recall << '\n'
        << prefix << '.' << self << ".f_score = " << m.f_score << '\n'
        << prefix << '.' << other << ".precision = " << m.negative.precision << '\n'
        << prefix << '.' << other << ".recall = " << m.negative.recall << '\n'
        << prefix << '.' << other << ".f_score = " << m.negative.f_score << '\n'
        << prefix << ".macro.precision = " << m.macro_precision << '\n'
        << prefix << ".macro.recall = " << m.macro_recall << '\n'
        << prefix << ".macro.f_score = " << m.macro_f_score << '\n';
    out.precision(old);
}

Pca2 pca2(const Eigen::MatrixXd& m) {
    if (m.rows() < 2 || m.cols() < 2) throw std::invalid_argument("pca2: need at least 2 rows and 2 columns");
    const Eigen::RowVectorXd mean = m.colwise().mean();
    const Eigen::MatrixXd centred = m.rowwise() - mean;
    const Eigen::MatrixXd cov = (centred.transpose() * centred) / static_cast<double>(m.rows() - 1);
    if (!(cov.trace() > 0.0)) throw std::invalid_argument("pca2: data has zero variance");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw std::runtime_error("pca2: eigendecomposition failed");
    const Eigen::Index n = m.cols();

    Pca2 out;
    out.components.resize(2, n);
    for (Eigen::Index c = 0; c < 2; ++c) {
        // Eigenvalues come back ascending.
        Eigen::VectorXd v = eig.eigenvectors().col(n - 1 - c);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        out.components.row(c) = v.transpose();
        out.explained_variance[static_cast<std::size_t>(c)] = std::max(eig.eigenvalues()(n - 1 - c), 0.0);
    }
    out.projections = centred * out.components.transpose();
    return out;
}

void write_pca(std::ostream& out, const Pca2& p, std::span<const int> labels) {
    if (labels.size() != static_cast<std::size_t>(p.projections.rows())) {
        throw std::invalid_argument("write_pca: label count does not match projection rows");
    }
    const auto old = out.precision(17);
    out << "pc1,pc2,label\n";
    for (Eigen::Index i = 0; i < p.projections.rows(); ++i) {
        out << p.projections(i, 0) << ',' << p.projections(i, 1) << ',' << labels[static_cast<std::size_t>(i)] << '\n';
    }
    out.precision(old);
}

}  // namespace botdetect
