//---------------------------------------------------------------------------//
//! \file modrec/optimize.hpp
//! Box-bounded Nelder-Mead simplex minimization.
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace modrec
{
//---------------------------------------------------------------------------//
struct Box
{
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t size() const { return lower.size(); }
    void clamp(std::span<double> x) const;
};

struct SimplexOptions
{
    int max_evals{20000};
    double f_tol_rel{1e-10};  //!< spread of vertex values relative to best
    double f_tol_abs{1e-30};
    double x_tol{1e-8};  //!< vertex spread relative to box width
    double initial_step{0.1};  //!< initial edge as a fraction of box width
    int max_restarts{4};  //!< re-seed the simplex at the optimum
};

struct SimplexResult
{
    std::vector<double> x;
    double f{0};
    int n_evals{0};
    bool converged{false};
};

using Objective = std::function<double(std::span<double const>)>;

// Minimize f over the box from x0; trial points are projected onto the box
SimplexResult minimize_simplex(Objective const& f,
                               std::vector<double> x0,
                               Box const& box,
                               SimplexOptions const& options = {});

// n stratified points in the box (one per stratum along every axis)
std::vector<std::vector<double>>
latin_hypercube(int n, Box const& box, std::uint64_t seed);

//---------------------------------------------------------------------------//
}  // namespace modrec
