#include <catch2/catch_amalgamated.hpp>

#include "locap/fock.hpp"
#include "oracles.hpp"

using namespace locap;

TEST_CASE("basis dimension matches the multiset formula", "[fock]") {
    CHECK(basis_dimension(2, 4) == 10);
    CHECK(basis_dimension(2, 6) == 21);
    CHECK(basis_dimension(2, 8) == 36);
    CHECK(basis_dimension(1, 5) == 5);
    CHECK(basis_dimension(0, 3) == 1);
    CHECK(basis_dimension(3, 3) == 10);
}

TEST_CASE("basis dimension guards", "[fock]") {
    CHECK_THROWS_AS(basis_dimension(-1, 4), InputError);
    CHECK_THROWS_AS(basis_dimension(2, 0), InputError);
    CHECK_THROWS_AS(basis_dimension(40, 40), InputError);  // beyond the element limit
}

TEST_CASE("basis enumeration is descending lexicographic", "[fock]") {
    auto basis = make_basis(2, 4);
    REQUIRE(basis->dim() == 10);
    CHECK(basis->at(0) == OccupationVector{2, 0, 0, 0});
    CHECK(basis->at(1) == OccupationVector{1, 1, 0, 0});
    CHECK(basis->at(9) == OccupationVector{0, 0, 0, 2});
    for (std::size_t i = 0; i + 1 < basis->dim(); ++i)
        CHECK(basis->at(i) > basis->at(i + 1));  // strictly descending
    for (std::size_t i = 0; i < basis->dim(); ++i)
        CHECK(basis->index_of(basis->at(i)) == i);
    CHECK(basis->contains({1, 0, 0, 1}));
    CHECK_FALSE(basis->contains({3, 0, 0, -1}));
    CHECK_THROWS_AS(basis->index_of({1, 1, 1, 1}), InputError);
}

TEST_CASE("basis cache returns a shared instance", "[fock]") {
    CHECK(make_basis(2, 4).get() == make_basis(2, 4).get());
    CHECK(make_basis(2, 4).get() != make_basis(2, 6).get());
}

TEST_CASE("occupation labels", "[fock]") {
    CHECK(occupation_label({1, 1, 0, 0}) == "1100");
    CHECK(occupation_label({0, 2, 0, 0}) == "0200");
    CHECK(total_photons({1, 1, 0, 0}) == 2);
}

TEST_CASE("states and inner products", "[fock]") {
    auto basis = make_basis(2, 4);
    const double half = 0.5;
    PureState psi = make_state(basis, {{{1, 1, 0, 0}, half},
                                       {{0, 1, 1, 0}, half},
                                       {{1, 0, 0, 1}, half},
                                       {{0, 0, 1, 1}, half}});
    CHECK(psi.norm() == Catch::Approx(1.0).margin(1e-14));
    CHECK(psi.photons() == 2);
    CHECK(psi.modes() == 4);

    // swap of the middle two modes maps each term onto the family again;
    // two of the four terms are fixed points, so the overlap is 1/2
    PureState swapped = make_state(basis, {{{1, 0, 1, 0}, half},
                                           {{0, 1, 1, 0}, half},
                                           {{1, 0, 0, 1}, half},
                                           {{0, 1, 0, 1}, half}});
    const cxd ov = inner_product(psi, swapped);
    CHECK(ov.real() == Catch::Approx(0.5).margin(1e-14));
    CHECK(ov.imag() == Catch::Approx(0.0).margin(1e-14));
    CHECK(std::abs(ov - oracles::direct_inner_product(psi, swapped)) < 1e-15);

    PureState other = basis_state(make_basis(2, 6), {1, 1, 0, 0, 0, 0});
    CHECK_THROWS_AS(inner_product(psi, other), InputError);
}

TEST_CASE("mean photon number over a mode window", "[fock]") {
    auto basis = make_basis(2, 4);
    PureState psi = make_state(basis, {{{1, 1, 0, 0}, 0.5},
                                       {{0, 1, 1, 0}, 0.5},
                                       {{1, 0, 0, 1}, 0.5},
                                       {{0, 0, 1, 1}, 0.5}});
    CHECK(mean_photon_number(psi, {0, 1}) == Catch::Approx(1.0).margin(1e-14));
    CHECK(mean_photon_number(psi, {2, 3}) == Catch::Approx(1.0).margin(1e-14));
    CHECK(mean_photon_number(psi, {0, 1, 2, 3}) == Catch::Approx(2.0).margin(1e-14));
    CHECK(mean_photon_number(psi, {0}) == Catch::Approx(0.5).margin(1e-14));

    CHECK_THROWS_AS(mean_photon_number(psi, {4}), InputError);
    CHECK_THROWS_AS(mean_photon_number(psi, {}), InputError);
    CHECK_THROWS_AS(mean_photon_number(zero_state(basis), {0}), InputError);
}

TEST_CASE("normalization", "[fock]") {
    auto basis = make_basis(1, 2);
    PureState s = normalize(make_state(basis, {{{1, 0}, 3.0}, {{0, 1}, 4.0}}));
    CHECK(s.norm() == Catch::Approx(1.0).margin(1e-15));
    CHECK(std::abs(s.amplitudes[basis->index_of({1, 0})]) == Catch::Approx(0.6).margin(1e-15));
    const PureState z = zero_state(basis);
    CHECK_THROWS_AS(normalize(z), InputError);
}

TEST_CASE("factorial is exact on small arguments", "[fock]") {
    CHECK(factorial(0) == 1.0);
    CHECK(factorial(1) == 1.0);
    CHECK(factorial(5) == 120.0);
    CHECK(factorial(10) == 3628800.0);
    CHECK_THROWS_AS(factorial(-1), InputError);
    CHECK_THROWS_AS(factorial(21), InputError);
}
