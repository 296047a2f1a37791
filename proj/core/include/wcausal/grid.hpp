#pragma once

#include <cstddef>
#include <vector>

#include "wcausal/errors.hpp"

namespace wcausal {

// Uniform grid of interior levels u_j = (j + 0.5) / m, j = 0..m-1.
// Levels stay strictly inside (0, 1), so quantile curves never need the
// extreme order statistics, and the midpoint rule over the nodes is the
// natural quadrature: integral f ~ mean of f over the nodes.
class LevelGrid {
  public:
    explicit LevelGrid(std::size_t m) : m_(m) {
        if (m == 0) throw InvalidArgument("LevelGrid: need at least one node");
    }

    std::size_t size() const { return m_; }

    double level(std::size_t j) const {
        return (static_cast<double>(j) + 0.5) / static_cast<double>(m_);
    }

    std::vector<double> levels() const {
        std::vector<double> u(m_);
        for (std::size_t j = 0; j < m_; ++j) u[j] = level(j);
        return u;
    }

    friend bool operator==(const LevelGrid& a, const LevelGrid& b) { return a.m_ == b.m_; }
    friend bool operator!=(const LevelGrid& a, const LevelGrid& b) { return a.m_ != b.m_; }

  private:
    std::size_t m_;
};

}  // namespace wcausal
