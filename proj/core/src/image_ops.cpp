#include "av2t/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace av2t {
namespace {

// Coverage weights of source cells for each destination cell along one axis.
struct Span1D {
    int begin;
    std::vector<double> weights;
};

std::vector<Span1D> area_spans(int src, int dst) {
    std::vector<Span1D> spans(dst);
    const double scale = static_cast<double>(src) / dst;
    for (int d = 0; d < dst; ++d) {
        const double lo = d * scale;
        const double hi = (d + 1) * scale;
        const int first = static_cast<int>(std::floor(lo));
        const int last = std::min(src - 1, static_cast<int>(std::ceil(hi)) - 1);
        spans[d].begin = first;
        for (int s = first; s <= last; ++s) {
            const double cover = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
            spans[d].weights.push_back(cover / scale);
        }
    }
    return spans;
}

}  // namespace

Matrix resize_area(const Matrix& src, int rows, int cols) {
    const auto rs = area_spans(static_cast<int>(src.rows()), rows);
    const auto cs = area_spans(static_cast<int>(src.cols()), cols);
    Matrix out = Matrix::Zero(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < rs[r].weights.size(); ++i)
                for (std::size_t j = 0; j < cs[c].weights.size(); ++j)
                    acc += rs[r].weights[i] * cs[c].weights[j] * src(rs[r].begin + i, cs[c].begin + j);
            out(r, c) = acc;
        }
    return out;
}

Matrix resize_bilinear(const Matrix& src, int rows, int cols) {
    const int sr = static_cast<int>(src.rows());
    const int sc = static_cast<int>(src.cols());
    Matrix out(rows, cols);
    auto locate = [](int d, int dst, int s, int& i0, int& i1, double& t) {
        double pos = (d + 0.5) * s / dst - 0.5;
        pos = std::clamp(pos, 0.0, static_cast<double>(s - 1));
        i0 = static_cast<int>(std::floor(pos));
        i1 = std::min(i0 + 1, s - 1);
        t = pos - i0;
    };
    for (int r = 0; r < rows; ++r) {
        int r0, r1;
        double tr;
        locate(r, rows, sr, r0, r1, tr);
        for (int c = 0; c < cols; ++c) {
            int c0, c1;
            double tc;
            locate(c, cols, sc, c0, c1, tc);
            const double top = src(r0, c0) * (1 - tc) + src(r0, c1) * tc;
            const double bottom = src(r1, c0) * (1 - tc) + src(r1, c1) * tc;
            out(r, c) = top * (1 - tr) + bottom * tr;
        }
    }
    return out;
}

Matrix resize_nearest(const Matrix& src, int rows, int cols) {
    Matrix out(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const int sr = std::min(static_cast<int>(src.rows()) - 1, static_cast<int>((r + 0.5) * src.rows() / rows));
        for (int c = 0; c < cols; ++c) {
            const int sc = std::min(static_cast<int>(src.cols()) - 1, static_cast<int>((c + 0.5) * src.cols() / cols));
            out(r, c) = src(sr, sc);
        }
    }
    return out;
}

Matrix resize_image(const Matrix& src, int rows, int cols) {
    if (src.rows() == rows && src.cols() == cols) return src;
    if (rows <= src.rows() && cols <= src.cols()) return resize_area(src, rows, cols);
    return resize_bilinear(src, rows, cols);
}

}  // namespace av2t
