// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Dense linear-algebra kernels shared by the channel model and the receiver.
//
// All kernels accept arbitrary Eigen expressions and return plain (evaluated)
// matrices. Storage is Eigen's default column-major order, so vec() is column
// stacking: column j of an I x J matrix lands at entries [j*I, j*I + I).

#ifndef MABALS_NUMKERNEL_HPP
#define MABALS_NUMKERNEL_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include "mabals/errors.hpp"

namespace mabals
{
    using Index = Eigen::Index;
    using cplx = std::complex<double>;
    using cmat = Eigen::MatrixXcd;
    using cvec = Eigen::VectorXcd;

    template <typename Derived>
    using plain_t = typename Derived::PlainObject;

    template <typename Derived>
    using plain_vec_t = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;

    // Kronecker product: block (i,j) of the result is a(i,j) * b.
    template <typename DA, typename DB>
    auto kron(const Eigen::MatrixBase<DA> &a, const Eigen::MatrixBase<DB> &b)
    {
        using Scalar = typename Eigen::ScalarBinaryOpTraits<typename DA::Scalar, typename DB::Scalar>::ReturnType;
        const Index K = b.rows(), L = b.cols();
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * K, a.cols() * L);
        const auto b_eval = b.eval();
        for (Index j = 0; j < a.cols(); ++j)
            for (Index i = 0; i < a.rows(); ++i)
                out.block(i * K, j * L, K, L) = a(i, j) * b_eval.template cast<Scalar>();
        return out;
    }

    template <typename Derived>
    plain_vec_t<Derived> vec(const Eigen::MatrixBase<Derived> &a)
    {
        return a.reshaped();
    }

    template <typename Derived>
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
    unvec(const Eigen::MatrixBase<Derived> &v, Index rows, Index cols)
    {
        if (v.cols() != 1 || v.rows() != rows * cols)
            throw std::invalid_argument("unvec: vector of length " + std::to_string(v.size()) +
                                        " cannot be reshaped to " + std::to_string(rows) + "x" +
                                        std::to_string(cols));
        return v.reshaped(rows, cols);
    }

    // D_p(C): diagonal matrix holding row p of c.
    template <typename Derived>
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
    diag_row(const Eigen::MatrixBase<Derived> &c, Index p)
    {
        if (p < 0 || p >= c.rows())
            throw std::out_of_range("diag_row: row " + std::to_string(p) + " outside [0, " +
                                    std::to_string(c.rows()) + ")");
        return c.row(p).transpose().asDiagonal();
    }

    template <typename Derived>
    double fro_norm(const Eigen::MatrixBase<Derived> &a)
    {
        return static_cast<double>(a.norm());
    }

    /// Moore-Penrose pseudoinverse via SVD.
    ///
    /// Singular values below max(rows, cols) * eps * sigma_max are treated as zero.
    /// If `truncated` is non-null it receives the number of singular values that
    /// were dropped by that threshold (0 for a numerically full-rank input).
    template <typename Derived>
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
    pinv(const Eigen::MatrixBase<Derived> &a, Index *truncated = nullptr)
    {
        using Scalar = typename Derived::Scalar;
        using Real = typename Eigen::NumTraits<Scalar>::Real;
        using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

        if (truncated)
            *truncated = 0;
        if (a.size() == 0)
            return Mat::Zero(a.cols(), a.rows());

        // JacobiSVD rather than BDCSVD: Eigen 3.4.0's BDCSVD returns wrong factors
        // for complex inputs with many zero columns, which W has whenever a
        // port goes unobserved.
        Eigen::JacobiSVD<Mat> svd(a.eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.info() != Eigen::Success)
            throw NumericalError("pinv: SVD did not converge for a " + std::to_string(a.rows()) + "x" +
                                 std::to_string(a.cols()) + " matrix");

        const auto &sigma = svd.singularValues();
        const Real rcond = static_cast<Real>(std::max(a.rows(), a.cols())) * std::numeric_limits<Real>::epsilon();
        const Real cutoff = rcond * sigma(0);

        Eigen::Matrix<Real, Eigen::Dynamic, 1> inv_sigma(sigma.size());
        Index dropped = 0;
        for (Index i = 0; i < sigma.size(); ++i)
        {
            if (sigma(i) > cutoff)
                inv_sigma(i) = Real(1) / sigma(i);
            else
            {
                inv_sigma(i) = Real(0);
                ++dropped;
            }
        }
        if (truncated)
            *truncated = dropped;

        return svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().adjoint();
    }

    template <typename Derived>
    bool all_finite(const Eigen::MatrixBase<Derived> &a)
    {
        return a.allFinite();
    }
}

#endif
