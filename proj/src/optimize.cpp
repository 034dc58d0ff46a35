//---------------------------------------------------------------------------//
//! \file optimize.cpp
//---------------------------------------------------------------------------//
#include "modrec/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "modrec/errors.hpp"
#include "modrec/rng.hpp"

namespace modrec
{
//---------------------------------------------------------------------------//
void Box::clamp(std::span<double> x) const
{
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::clamp(x[i], lower[i], upper[i]);
}

namespace
{
using Point = std::vector<double>;

struct Simplex
{
    std::vector<Point> x;
    std::vector<double> f;

    void sort()
    {
        std::vector<std::size_t> idx(x.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
            return f[a] < f[b];
        });
        std::vector<Point> xs;
        std::vector<double> fs;
        for (auto i : idx)
        {
            xs.push_back(std::move(x[i]));
            fs.push_back(f[i]);
        }
        x = std::move(xs);
        f = std::move(fs);
    }
};

}  // namespace

//---------------------------------------------------------------------------//
/*!
 * Nelder-Mead with reflection 1, expansion 2, contraction 1/2, shrink 1/2.
 *
 * Non-finite objective values are treated as +inf so the simplex retreats
 * from undefined regions. After convergence the simplex is rebuilt around
 * the best vertex and the search continues until a restart yields no
 * improvement, which guards against premature collapse.
 */
SimplexResult minimize_simplex(Objective const& objective,
                               std::vector<double> x0,
                               Box const& box,
                               SimplexOptions const& options)
{
    std::size_t const n = x0.size();
    if (box.lower.size() != n || box.upper.size() != n)
        throw ValidationError("simplex box dimension mismatch");

    SimplexResult result;
    auto eval = [&](Point& p) {
        box.clamp(p);
        ++result.n_evals;
        double v = objective(p);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    box.clamp(x0);
    if (n == 0)
    {
        result.x = x0;
        result.f = eval(x0);
        result.converged = true;
        return result;
    }

    std::vector<double> width(n);
    for (std::size_t i = 0; i < n; ++i)
        width[i] = box.upper[i] - box.lower[i];

    auto build = [&](Point const& center, double f_center, double step) {
        Simplex s;
        s.x.push_back(center);
        s.f.push_back(f_center);
        for (std::size_t i = 0; i < n; ++i)
        {
            Point p = center;
            double h = step * width[i];
            if (h == 0)
                h = step;
            p[i] = (p[i] + h <= box.upper[i]) ? p[i] + h : p[i] - h;
            s.f.push_back(eval(p));
            s.x.push_back(std::move(p));
        }
        s.sort();
        return s;
    };

    auto converged = [&](Simplex const& s) {
        double spread = s.f.back() - s.f.front();
        if (!std::isfinite(spread))
            return false;
        if (spread > options.f_tol_abs + options.f_tol_rel * std::abs(s.f.front()))
            return false;
        for (std::size_t v = 1; v <= n; ++v)
        {
            for (std::size_t i = 0; i < n; ++i)
            {
                double scale = width[i] > 0 ? width[i] : 1.0;
                if (std::abs(s.x[v][i] - s.x[0][i]) > options.x_tol * scale)
                    return false;
            }
        }
        return true;
    };

    double const f0 = eval(x0);
    Simplex s = build(x0, f0, options.initial_step);
    int restarts = 0;
    double last_restart_f = std::numeric_limits<double>::infinity();

    while (result.n_evals < options.max_evals)
    {
        if (converged(s))
        {
            // Stop once a restart no longer improves the optimum
            if (restarts >= options.max_restarts || !(s.f.front() < last_restart_f))
            {
                result.converged = true;
                break;
            }
            last_restart_f = s.f.front();
            ++restarts;
            Point best = s.x.front();
            s = build(best, s.f.front(), options.initial_step * 0.1);
            continue;
        }

        // Centroid of all but the worst vertex
        Point c(n, 0.0);
        for (std::size_t v = 0; v < n; ++v)
        {
            for (std::size_t i = 0; i < n; ++i)
                c[i] += s.x[v][i] / static_cast<double>(n);
        }
        auto along = [&](double t) {
            Point p(n);
            for (std::size_t i = 0; i < n; ++i)
                p[i] = c[i] + t * (s.x[n][i] - c[i]);
            return p;
        };

        Point xr = along(-1.0);
        double fr = eval(xr);
        if (fr < s.f[0])
        {
            Point xe = along(-2.0);
            double fe = eval(xe);
            if (fe < fr)
            {
                s.x[n] = std::move(xe);
                s.f[n] = fe;
            }
            else
            {
                s.x[n] = std::move(xr);
                s.f[n] = fr;
            }
        }
        else if (fr < s.f[n - 1])
        {
            s.x[n] = std::move(xr);
            s.f[n] = fr;
        }
        else
        {
            bool const outside = fr < s.f[n];
            Point xc = along(outside ? -0.5 : 0.5);
            double fc = eval(xc);
            if (fc < (outside ? fr : s.f[n]))
            {
                s.x[n] = std::move(xc);
                s.f[n] = fc;
            }
            else
            {
                for (std::size_t v = 1; v <= n; ++v)
                {
                    for (std::size_t i = 0; i < n; ++i)
                        s.x[v][i] = s.x[0][i] + 0.5 * (s.x[v][i] - s.x[0][i]);
                    s.f[v] = eval(s.x[v]);
                }
            }
        }
        s.sort();
    }

    result.x = s.x.front();
    result.f = s.f.front();
    return result;
}

//---------------------------------------------------------------------------//
std::vector<std::vector<double>>
latin_hypercube(int n, Box const& box, std::uint64_t seed)
{
    std::size_t const dim = box.size();
    std::vector<std::vector<double>> points(static_cast<std::size_t>(n),
                                            std::vector<double>(dim));
    CounterRng rng(seed, 0x1a7e5ull);
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (std::size_t d = 0; d < dim; ++d)
    {
        std::iota(perm.begin(), perm.end(), 0);
        // Fisher-Yates with the counter stream
        for (std::size_t i = perm.size(); i > 1; --i)
        {
            auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
            std::swap(perm[i - 1], perm[j]);
        }
        for (std::size_t k = 0; k < perm.size(); ++k)
        {
            double u = (perm[k] + rng.uniform()) / n;
            points[k][d] = box.lower[d] + u * (box.upper[d] - box.lower[d]);
        }
    }
    return points;
}

//---------------------------------------------------------------------------//
}  // namespace modrec
