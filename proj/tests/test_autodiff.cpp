#include <catch2/catch_amalgamated.hpp>
#include <cstring>

#include "oracles.hpp"
#include "touchline/autodiff.hpp"
#include "touchline/gradcheck.hpp"
#include "touchline/rng.hpp"

using namespace touchline;
using Catch::Approx;

namespace {

Tensor random_tensor(Rng& rng, int r, int c, double lo = -1.0, double hi = 1.0) {
    Tensor t(r, c);
    auto& d = t.mutable_data();
    for (auto& v : d) v = rng.uniform(lo, hi);
    return t;
}

// Finite-difference check of a tape-built scalar function of `params`.
template <class Builder>
double fd_check(ParamStore params, Builder&& build, double step = 1e-5) {
    auto value = [&](const ParamStore& p) {
        Tape t;
        std::vector<Var> leaves;
        for (const Tensor& ten : p.tensors) leaves.push_back(t.leaf(ten, true));
        return t.value(build(t, leaves));
    };
    auto grad = [&](const ParamStore& p, std::vector<std::vector<double>>& out) {
        Tape t;
        std::vector<Var> leaves;
        for (const Tensor& ten : p.tensors) leaves.push_back(t.leaf(ten, true));
        const Var loss = build(t, leaves);
        t.backward(loss);
        out.clear();
        for (const Var& v : leaves) out.push_back(t.grad(v));
        return t.value(loss);
    };
    Rng rng(99);
    const auto rep = gradcheck(value, grad, std::move(params), step, 10000, rng);
    REQUIRE(rep.checked > 0);
    return rep.max_rel_err;
}

} // namespace

TEST_CASE("softmax of zeros is uniform") {
    Tape t;
    const Var x = t.constant(1, 4, {0, 0, 0, 0});
    const Var y = t.softmax_rows(x);
    for (int j = 0; j < 4; ++j) CHECK(t.values(y)[j] == Approx(0.25));
}

TEST_CASE("relu subgradient at zero is zero") {
    Tape t;
    const Var x = t.leaf(Tensor(1, 1, {0.0}), true);
    const Var y = t.mul(t.relu(x), t.relu(t.mul_scalar(x, -1.0)));
    t.backward(y);
    CHECK(t.grad(x)[0] == 0.0);
}

TEST_CASE("matmul forward matches the triple-loop oracle") {
    Rng rng(3);
    const Tensor a = random_tensor(rng, 2, 3);
    const Tensor b = random_tensor(rng, 3, 2);
    Tape t;
    const Var c = t.matmul(t.leaf(a), t.leaf(b));
    const auto expect = oracles::naive_matmul(a.data(), b.data(), 2, 3, 2);
    for (int i = 0; i < 4; ++i) CHECK(t.values(c)[i] == Approx(expect[i]).epsilon(1e-14));

    const Tensor a2 = random_tensor(rng, 5, 7);
    const Tensor b2 = random_tensor(rng, 7, 4);
    Tape t2;
    const Var c2 = t2.matmul(t2.leaf(a2), t2.leaf(b2));
    const auto expect2 = oracles::naive_matmul(a2.data(), b2.data(), 5, 7, 4);
    for (std::size_t i = 0; i < expect2.size(); ++i)
        CHECK(t2.values(c2)[i] == Approx(expect2[i]).epsilon(1e-14));
}

TEST_CASE("backward of sum gives ones; of sum of squares gives 2x") {
    Tape t;
    const Var x = t.leaf(Tensor(2, 3, {1, 2, 3, 4, 5, 6}), true);
    t.backward(t.sum_all(x));
    for (double g : t.grad(x)) CHECK(g == 1.0);

    Tape t2;
    const Var y = t2.leaf(Tensor(1, 3, {1, 2, 3}), true);
    t2.backward(t2.sum_all(t2.mul(y, y)));
    CHECK(t2.grad(y)[0] == Approx(2.0));
    CHECK(t2.grad(y)[1] == Approx(4.0));
    CHECK(t2.grad(y)[2] == Approx(6.0));
}

TEST_CASE("backward requires a scalar") {
    Tape t;
    const Var x = t.leaf(Tensor(2, 2, {1, 2, 3, 4}), true);
    CHECK_THROWS_AS(t.backward(x), NotScalar);
}

TEST_CASE("shape mismatches are rejected") {
    Tape t;
    const Var a = t.constant(2, 2, {1, 2, 3, 4});
    const Var b = t.constant(1, 2, {1, 2});
    CHECK_THROWS_AS(t.add(a, b), ShapeMismatch);
    CHECK_THROWS_AS(t.matmul(b, b), ShapeMismatch);
    CHECK_THROWS_AS(t.slice_rows(a, 0, 3), ShapeMismatch);
}

TEST_CASE("every primitive passes finite-difference checks") {
    Rng rng(17);
    const double tol = 1e-6;

    ParamStore two;
    two.add("a", random_tensor(rng, 3, 4, 0.2, 1.5));
    two.add("b", random_tensor(rng, 3, 4, 0.2, 1.5));

    auto check2 = [&](auto op) {
        ParamStore p = two;
        return fd_check(p, [&](Tape& t, std::vector<Var>& l) {
            return t.sum_all(op(t, l[0], l[1]));
        });
    };
    CHECK(check2([](Tape& t, Var a, Var b) { return t.add(a, b); }) < tol);
    CHECK(check2([](Tape& t, Var a, Var b) { return t.sub(a, b); }) < tol);
    CHECK(check2([](Tape& t, Var a, Var b) { return t.mul(a, b); }) < tol);
    CHECK(check2([](Tape& t, Var a, Var b) { return t.div(a, b); }) < tol);
    CHECK(check2([](Tape& t, Var a, Var b) { return t.min(a, b); }) < tol);
    CHECK(check2([](Tape& t, Var a, Var b) { return t.max(a, b); }) < tol);
    CHECK(check2([](Tape& t, Var a, Var b) { return t.mul(t.abs(a), t.sigmoid(b)); }) < tol);
    CHECK(check2([](Tape& t, Var a, Var b) { return t.add(t.log(a), t.exp(b)); }) < tol);
    CHECK(check2([](Tape& t, Var a, Var b) { return t.add(t.sqrt(a), t.relu(b)); }) < tol);
    CHECK(check2([](Tape& t, Var a, Var b) {
        return t.add_row(t.mul_scalar(a, 1.7), t.slice_rows(b, 0, 1));
    }) < tol);

    ParamStore mm;
    mm.add("a", random_tensor(rng, 3, 5));
    mm.add("b", random_tensor(rng, 5, 2));
    CHECK(fd_check(mm, [](Tape& t, std::vector<Var>& l) {
        return t.sum_all(t.matmul(l[0], l[1]));
    }) < tol);
    CHECK(fd_check(mm, [](Tape& t, std::vector<Var>& l) {
        return t.sum_all(t.matmul(t.transpose(l[1]), t.transpose(l[0])));
    }) < tol);

    ParamStore one;
    one.add("x", random_tensor(rng, 4, 6));
    CHECK(fd_check(one, [](Tape& t, std::vector<Var>& l) {
        return t.sum_all(t.mul(t.softmax_rows(l[0]), t.log_softmax_rows(l[0])));
    }) < tol);
    CHECK(fd_check(one, [](Tape& t, std::vector<Var>& l) {
        return t.sum_all(t.layer_norm_rows(l[0]));
    }) < 1e-4);
    CHECK(fd_check(one, [](Tape& t, std::vector<Var>& l) {
        return t.sum_all(t.mul(t.layer_norm_rows(l[0]), l[0]));
    }) < 1e-4);
    CHECK(fd_check(one, [](Tape& t, std::vector<Var>& l) {
        return t.sum_all(t.slice_cols(t.slice_rows(l[0], 1, 3), 2, 5));
    }) < tol);
    CHECK(fd_check(one, [](Tape& t, std::vector<Var>& l) {
        return t.sum_all(t.concat_rows({l[0], t.mul_scalar(l[0], 2.0)}));
    }) < tol);
    CHECK(fd_check(one, [](Tape& t, std::vector<Var>& l) {
        return t.sum_all(t.mul(t.concat_cols({l[0], l[0]}),
                               t.concat_cols({t.mul_scalar(l[0], 0.5), l[0]})));
    }) < tol);
    CHECK(fd_check(one, [](Tape& t, std::vector<Var>& l) {
        return t.mean_all(t.exp(t.mul_scalar(l[0], 0.3)));
    }) < tol);
    CHECK(fd_check(one, [](Tape& t, std::vector<Var>& l) {
        return t.logsumexp_row(t.slice_rows(l[0], 2, 3));
    }) < tol);

    ParamStore emb;
    emb.add("table", random_tensor(rng, 6, 3));
    CHECK(fd_check(emb, [](Tape& t, std::vector<Var>& l) {
        return t.sum_all(t.mul(t.embed(l[0], {1, 4, 1}), t.embed(l[0], {0, 5, 1})));
    }) < tol);

    ParamStore aff;
    aff.add("x", random_tensor(rng, 4, 3));
    aff.add("g", random_tensor(rng, 1, 3, 0.5, 1.5));
    aff.add("b", random_tensor(rng, 1, 3));
    CHECK(fd_check(aff, [](Tape& t, std::vector<Var>& l) {
        return t.sum_all(t.mul(t.row_affine(l[0], l[1], l[2]), l[0]));
    }) < tol);
}

TEST_CASE("composite graph gradient matches finite differences") {
    Rng rng(31);
    ParamStore p;
    p.add("w1", random_tensor(rng, 4, 5));
    p.add("w2", random_tensor(rng, 5, 3));
    p.add("b", random_tensor(rng, 1, 3));
    const Tensor input = random_tensor(rng, 2, 4);

    const double err = fd_check(p, [&](Tape& t, std::vector<Var>& l) {
        const Var x = t.leaf(input);
        const Var h = t.sigmoid(t.matmul(x, l[0]));
        const Var z = t.add_row(t.matmul(h, l[1]), l[2]);
        const Var sm = t.log_softmax_rows(z);
        return t.mul_scalar(t.sum_all(t.mul(sm, sm)), 0.25);
    });
    CHECK(err < 1e-6);
}

TEST_CASE("backward is deterministic and the tape replays bit-exactly") {
    Rng rng(5);
    const Tensor a = random_tensor(rng, 6, 6);
    const Tensor b = random_tensor(rng, 6, 6);
    auto run = [&](std::vector<double>& grads) {
        Tape t;
        const Var va = t.leaf(a, true);
        const Var vb = t.leaf(b, true);
        const Var y = t.sum_all(t.softmax_rows(t.matmul(t.layer_norm_rows(va), vb)));
        t.backward(y);
        REQUIRE(t.replay_check());
        grads = t.grad(va);
        auto gb = t.grad(vb);
        grads.insert(grads.end(), gb.begin(), gb.end());
        return t.value(y);
    };
    std::vector<double> g1, g2;
    const double v1 = run(g1);
    const double v2 = run(g2);
    CHECK(v1 == v2);
    REQUIRE(g1.size() == g2.size());
    CHECK(std::memcmp(g1.data(), g2.data(), g1.size() * sizeof(double)) == 0);
}

TEST_CASE("gradcheck on a quadratic form is near-exact") {
    Rng rng(41);
    ParamStore p;
    p.add("x", random_tensor(rng, 1, 5));
    auto value = [](const ParamStore& ps) {
        Tape t;
        const Var x = t.leaf(ps.tensors[0], true);
        return t.value(t.sum_all(t.mul(x, x)));
    };
    auto grad = [](const ParamStore& ps, std::vector<std::vector<double>>& out) {
        Tape t;
        const Var x = t.leaf(ps.tensors[0], true);
        const Var loss = t.sum_all(t.mul(x, x));
        t.backward(loss);
        out = {t.grad(x)};
        return t.value(loss);
    };
    Rng probe(1);
    const auto rep = gradcheck(value, grad, p, 1e-5, 1000, probe);
    CHECK(rep.checked == 5);
    CHECK(rep.max_rel_err < 1e-8);
}

TEST_CASE("gradcheck excludes coordinates sitting on a relu kink") {
    ParamStore p;
    p.add("x", Tensor(1, 1, {0.0}));
    auto value = [](const ParamStore& ps) {
        Tape t;
        return t.value(t.relu(t.leaf(ps.tensors[0], true)));
    };
    auto grad = [](const ParamStore& ps, std::vector<std::vector<double>>& out) {
        Tape t;
        const Var x = t.leaf(ps.tensors[0], true);
        const Var loss = t.relu(x);
        t.backward(loss);
        out = {t.grad(x)};
        return t.value(loss);
    };
    Rng probe(1);
    const auto rep = gradcheck(value, grad, p, 1e-5, 10, probe);
    CHECK(rep.excluded_kinks == 1);
    CHECK(rep.checked == 0);
}
