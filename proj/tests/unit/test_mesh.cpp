#include "plap/error.hpp"
#include "plap/mesh.hpp"

#include <doctest.h>

#include <numbers>

using namespace plap;

TEST_SUITE("mesh")
{
    TEST_CASE("interval mesh partitions the segment uniformly")
    {
        const Mesh m = build_interval_mesh(4, 1.0);
        CHECK(m.num_vertices() == 5);
        CHECK(m.num_cells() == 4);
        for (double v : m.cell_volumes())
            CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(build_interval_mesh(2, 2.0).total_volume() == doctest::Approx(2.0).epsilon(1e-15));

        const Mesh fine = build_interval_mesh(100, 1.0);
        REQUIRE(fine.boundary_nodes().size() == 2);
        CHECK(fine.boundary_nodes()[0] == 0);
        CHECK(fine.boundary_nodes()[1] == 100);
        CHECK_FALSE(fine.closed());
    }

    TEST_CASE("flat torus has two triangles per square and no boundary")
    {
        const Mesh m = build_flat_torus_mesh(4, 4, 1.0, 1.0);
        CHECK(m.num_vertices() == 16);
        CHECK(m.num_cells() == 32);
        CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(build_flat_torus_mesh(3, 3, 2.0, 1.0).total_volume() == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(m.closed());
        CHECK(m.boundary_nodes().empty());
        CHECK(m.periodic());
    }

    TEST_CASE("rectangle mesh carries its perimeter as boundary")
    {
        const Mesh m = build_rectangle_mesh(3, 2, 1.5, 1.0);
        CHECK(m.num_vertices() == 12);
        CHECK(m.num_cells() == 12);
        CHECK(m.total_volume() == doctest::Approx(1.5).epsilon(1e-14));
        CHECK(m.boundary_nodes().size() == 10);
    }

    TEST_CASE("icosphere combinatorics and area")
    {
        const Mesh ico = build_triangulated_sphere(0, 1.0);
        CHECK(ico.num_vertices() == 12);
        CHECK(ico.num_cells() == 20);
        for (int k = 0; k < 3; ++k)
            CHECK(build_triangulated_sphere(k + 1, 2.0).num_cells() == 4 * build_triangulated_sphere(k, 2.0).num_cells());

        // Flat-triangle area of the level-3 sphere against the exact 4 pi.
        const double area = build_triangulated_sphere(3, 1.0).total_volume();
        CHECK(std::abs(area - 4.0 * std::numbers::pi) / (4.0 * std::numbers::pi) < 0.02);
        CHECK(area < 4.0 * std::numbers::pi);
        CHECK(build_triangulated_sphere(2, 1.0).closed());
    }

    TEST_CASE("builders reject bad parameters")
    {
        CHECK_THROWS_AS(build_interval_mesh(1, 1.0), DomainError);
        CHECK_THROWS_AS(build_interval_mesh(4, 0.0), DomainError);
        CHECK_THROWS_AS(build_flat_torus_mesh(2, 4, 1.0, 1.0), DomainError);
        CHECK_THROWS_AS(build_triangulated_sphere(kMaxSphereSubdivisions + 1, 1.0), DomainError);
    }

    TEST_CASE("save and load round trip")
    {
        for (const Mesh& m : {build_interval_mesh(4, 1.0), build_flat_torus_mesh(3, 4, 1.0, 2.0),
                              build_triangulated_sphere(1, 1.0)}) {
            const Mesh back = parse_mesh(format_mesh(m));
            CHECK(back.same_geometry(m));
            CHECK_FALSE(back.id() == m.id());
        }
    }

    TEST_CASE("mesh file validation")
    {
        try {
            parse_mesh("");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("missing header") != std::string::npos);
        }
        const std::string bad = "PLAPMESH v1 dim=1 closed=0\n2 1\n0\n1\n0 7\nboundary 0 1\n";
        try {
            parse_mesh(bad);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("index out of range") != std::string::npos);
            CHECK(e.line() == 5);
        }
    }

    TEST_CASE("mesh constructor invariants")
    {
        // Degenerate segment.
        CHECK_THROWS_AS(Mesh(1, 1, {{0, 0, 0}, {0, 0, 0}}, {0, 1}, {0, 1}, false), CellError);
        // Closed flag with boundary nodes.
        CHECK_THROWS_AS(Mesh(1, 1, {{0, 0, 0}, {1, 0, 0}}, {0, 1}, {0}, true), MeshError);
        // Two disconnected segments.
        CHECK_THROWS_AS(
            Mesh(1, 1, {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}}, {0, 1, 2, 3}, {0, 1, 2, 3}, false), MeshError);
    }

    TEST_CASE("integrate sums cell values against volumes")
    {
        const Mesh m = build_interval_mesh(10, 1.0);
        std::vector<double> ones(m.num_cells(), 1.0), zeros(m.num_cells(), 0.0), half(m.num_cells(), 0.0);
        for (std::size_t c = 0; c < half.size() / 2; ++c)
            half[c] = 1.0;
        CHECK(integrate(m, ones) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(integrate(m, zeros) == 0.0);
        CHECK(integrate(m, half) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK_THROWS_AS(integrate(m, std::vector<double>(3, 1.0)), DomainError);
    }

    TEST_CASE("lumped mass sums to the volume")
    {
        for (const Mesh& m : {build_interval_mesh(7, 3.0), build_flat_torus_mesh(5, 4, 1.0, 2.0),
                              build_triangulated_sphere(2, 1.0)}) {
            double s = 0.0;
            for (double w : m.lumped_mass())
                s += w;
            CHECK(s == doctest::Approx(m.total_volume()).epsilon(1e-13));
        }
    }
}
