"""Mesh generation tests: volume convergence, seam construction,
quality metrics, determinism, and the neutral-format round-trip."""

import math

import numpy as np
import pytest

from foamact.mesh import (
    MAT_FOAM,
    MAT_SKIN,
    MeshGenerationError,
    MeshResolution,
    aspect_ratios,
    element_volumes,
    load_neutral,
    mesh_cylinder,
    quality_report,
    save_neutral,
    scaled_jacobians,
)
from foamact.pattern import PatternSpec, Substrate, layout

SUB = Substrate()
RES = MeshResolution()


def build(spec=None, res=RES, sub=SUB, skin=None):
    incs = layout(spec, sub) if spec is not None else None
    return mesh_cylinder(sub, incs, res, skin=skin)


class TestPlainCylinder:
    def test_volume_within_2_percent(self):
        mesh = build()
        foam_exact = math.pi * SUB.R ** 2 * SUB.H
        total_exact = math.pi * (SUB.R + SUB.t) ** 2 * SUB.H
        total = float(element_volumes(mesh.nodes, mesh.elems).sum())
        assert abs(mesh.foam_volume() - foam_exact) / foam_exact < 0.02
        assert abs(total - total_exact) / total_exact < 0.02

    def test_refinement_improves_volume(self):
        exact = math.pi * SUB.R ** 2 * SUB.H
        coarse = build()
        fine = build(res=MeshResolution(8, 8, 40, 1))
        err_c = abs(coarse.foam_volume() - exact) / exact
        err_f = abs(fine.foam_volume() - exact) / exact
        assert err_f < 0.005
        assert err_f < err_c

    def test_skin_shell_present_and_thin(self):
        mesh = build()
        assert np.any(mesh.mat == MAT_SKIN)
        skin_elems = mesh.elems[mesh.mat == MAT_SKIN]
        r = np.linalg.norm(mesh.nodes[skin_elems][..., :2], axis=-1)
        assert r.min() >= SUB.R - 1e-6
        assert r.max() <= SUB.R + SUB.t + 1e-6

    def test_skinless_variant(self):
        mesh = build(skin=False)
        assert not np.any(mesh.mat == MAT_SKIN)
        r = np.linalg.norm(mesh.nodes[:, :2], axis=1)
        assert r.max() <= SUB.R + 1e-6

    def test_no_seams_without_incisions(self):
        assert build().seams == []

    def test_boundary_sets(self):
        mesh = build()
        assert np.allclose(mesh.nodes[mesh.bottom_nodes, 2], 0.0)
        assert np.allclose(mesh.nodes[mesh.top_nodes, 2], SUB.H)

    def test_external_surface_closed_and_tagged(self):
        mesh = build()
        tags = mesh.surface_tags
        assert set(np.unique(tags)) == {0, 1, 2}
        # the outward area vectors of a closed surface sum to zero
        quads = mesh.nodes[mesh.surface_faces]
        av = 0.5 * np.cross(quads[:, 2] - quads[:, 0], quads[:, 3] - quads[:, 1])
        assert np.linalg.norm(av.sum(axis=0)) < 1e-8 * np.abs(av).sum()

    def test_positive_jacobians(self):
        mesh = build()
        assert scaled_jacobians(mesh.nodes, mesh.elems).min() > 0.2

    def test_determinism(self):
        assert build().content_hash() == build().content_hash()


@pytest.mark.parametrize("spec", [
    PatternSpec(kind="transverse", N=2, l=62.8, d=20.0),
    PatternSpec(kind="longitudinal", N=2, l=60.0, d=10.0),
    PatternSpec(kind="diagonal", N=2, l=74.5, d=10.0, gamma=32.5,
                handedness="left"),
], ids=["transverse", "longitudinal", "diagonal"])
class TestIncisedMeshes:
    def test_seams_coincident_in_reference(self, spec):
        mesh = build(spec)
        assert len(mesh.seams) == spec.N
        for seam in mesh.seams:
            assert seam.faces_a.shape == seam.faces_b.shape
            assert seam.faces_a.shape[0] > 0
            pa = np.sort(mesh.nodes[seam.faces_a].reshape(-1, 3), axis=0)
            pb = np.sort(mesh.nodes[seam.faces_b].reshape(-1, 3), axis=0)
            assert np.allclose(pa, pb, atol=1e-9)

    def test_cut_faces_can_separate(self, spec):
        # interior cut nodes are duplicated (only the cut-front perimeter
        # stays attached), so the two sides can move apart
        mesh = build(spec)
        for seam in mesh.seams:
            a = set(seam.faces_a.ravel())
            b = set(seam.faces_b.ravel())
            assert a != b
            assert len(a - b) > 0 and len(b - a) > 0

    def test_volume_preserved_by_cutting(self, spec):
        # cutting duplicates nodes but moves nothing
        cut = build(spec)
        exact = math.pi * (SUB.R + SUB.t) ** 2 * SUB.H
        v1 = float(element_volumes(cut.nodes, cut.elems).sum())
        assert abs(v1 - exact) / exact < 0.025

    def test_quality_report(self, spec):
        mesh = build(spec)
        rep = quality_report(mesh)
        assert rep["n_seams"] == spec.N
        assert rep["min_scaled_jacobian"] > 0.0
        assert rep["coincident_pairs_off_seam"] == 0

    def test_determinism(self, spec):
        assert build(spec).content_hash() == build(spec).content_hash()


class TestDiagonalGeometry:
    def test_sections_twist_with_the_cut(self):
        spec = PatternSpec(kind="diagonal", N=2, l=74.5, d=10.0,
                           gamma=32.5, handedness="left")
        mesh = build(spec)
        assert mesh.twist_per_z != 0.0

    def test_mixed_diagonal_angles_rejected(self):
        from foamact.pattern import IncisionSurface
        incs = [
            IncisionSurface("diagonal", (0.0, 20.0), (30.0, 60.0), 10.0),
            IncisionSurface("diagonal", (60.0, 20.0), (40.0, 60.0), 10.0),
        ]
        with pytest.raises(MeshGenerationError, match="handedness|angle"):
            mesh_cylinder(SUB, incs, RES)


class TestLigamentGuard:
    def test_too_close_transverse_cuts_rejected(self):
        spec = PatternSpec(kind="transverse", N=2, l=62.8, d=20.0, w=4.0)
        with pytest.raises(MeshGenerationError, match="ligament"):
            build(spec)


class TestResolutionValidation:
    def test_invalid_resolution(self):
        with pytest.raises(ValueError):
            MeshResolution(m=0)
        with pytest.raises(ValueError):
            MeshResolution(nz=1)

    def test_refined(self):
        r = RES.refined()
        assert (r.m, r.nr, r.nz) == (RES.m * 2, RES.nr * 2, RES.nz * 2)


class TestAspectRatio:
    def test_unit_cube_metrics(self):
        nodes = np.array([[0., 0., 0.], [1., 0., 0.], [1., 1., 0.], [0., 1., 0.],
                          [0., 0., 1.], [1., 0., 1.], [1., 1., 1.], [0., 1., 1.]])
        elems = np.arange(8, dtype=np.int64)[None, :]
        assert scaled_jacobians(nodes, elems)[0] == pytest.approx(1.0)
        assert aspect_ratios(nodes, elems)[0] == pytest.approx(1.0)
        assert element_volumes(nodes, elems)[0] == pytest.approx(1.0)


class TestNeutralFormat:
    def test_round_trip_exact(self, tmp_path):
        spec = PatternSpec(kind="transverse", N=1, l=62.8, d=20.0)
        mesh = build(spec)
        path = tmp_path / "mesh.txt"
        save_neutral(mesh, path)
        back = load_neutral(path)
        assert np.array_equal(back.nodes, mesh.nodes)
        assert np.array_equal(back.elems, mesh.elems)
        assert np.array_equal(back.mat, mesh.mat)
        assert np.array_equal(back.top_nodes, mesh.top_nodes)
        assert np.array_equal(back.bottom_nodes, mesh.bottom_nodes)
        assert len(back.seams) == 1
        assert np.array_equal(back.seams[0].faces_a, mesh.seams[0].faces_a)
        assert back.content_hash() == mesh.content_hash()

    def test_save_is_byte_stable(self, tmp_path):
        mesh = build()
        p1, p2 = tmp_path / "a.txt", tmp_path / "b.txt"
        save_neutral(mesh, p1)
        save_neutral(mesh, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.txt"
        path.write_text("not a mesh\n")
        with pytest.raises(ValueError, match="neutral mesh"):
            load_neutral(path)
