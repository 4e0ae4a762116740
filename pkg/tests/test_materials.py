"""Tests for catalog ingestion, normalization and material lookup."""

import numpy as np
import pytest

from src.errors import (
    CatalogValidationError,
    EmptyCatalogError,
    InputValidationError,
    MalformedFileError,
)
from src.materials import (
    Catalog,
    MaterialRecord,
    chunk_index,
    denormalize,
    flat_chunk_id,
    generate_synthetic_catalog,
    load_catalog,
    nearest_material,
    nearest_materials,
    normalize,
    sample_material,
    save_catalog,
)


def write_csv(tmp_path, text: str):
    path = tmp_path / "catalog.csv"
    path.write_text(text, encoding="utf-8")
    return path


# =============================================================================
# Normalization
# =============================================================================

class TestNormalization:
    def test_bounds_map_to_unit_cube(self):
        assert np.allclose(normalize([0.0, 0.0, 0.0]), [-1.0, -1.0, -1.0])
        assert np.allclose(normalize([500.0, 0.5, 10.0]), [1.0, 1.0, 1.0])
        assert np.allclose(normalize([250.0, 0.25, 5.0]), [0.0, 0.0, 0.0])

    def test_denormalize_inverts_normalize(self):
        values = np.array([[70.0, 0.33, 2.7], [1.5, 0.49, 9.9]])
        assert np.allclose(denormalize(normalize(values)), values)

    def test_out_of_bounds_values_are_clamped(self, caplog):
        assert np.allclose(normalize([600.0, 0.25, 5.0]), [1.0, 0.0, 0.0])
        assert "clamped" in caplog.text
        assert np.allclose(denormalize([1.5, -2.0, 0.0]), [500.0, 0.0, 5.0])

    def test_chunk_index(self):
        assert chunk_index(MaterialRecord(id=1, E=49.9, nu=0.01, rho=9.99)) == (0, 0, 9)
        # Upper faces belong to the next chunk; E = 500 stays in the last one
        assert chunk_index(MaterialRecord(id=2, E=50.0, nu=0.05, rho=1.0)) == (1, 1, 1)
        assert chunk_index(MaterialRecord(id=3, E=500.0, nu=0.45, rho=5.0)) == (9, 9, 5)
        assert flat_chunk_id((9, 9, 5)) == 995


# =============================================================================
# Catalog ingestion
# =============================================================================

class TestLoadCatalog:
    def test_valid_file(self, tmp_path):
        path = write_csv(tmp_path, "id,E,nu,rho\n2,150,0.25,2.7\n1,15,0.25,1.2\n")
        catalog = load_catalog(path)
        assert len(catalog) == 2
        assert [record.id for record in catalog] == [1, 2]
        assert catalog.properties.shape == (2, 3)

    def test_wrong_header(self, tmp_path):
        path = write_csv(tmp_path, "id,E,poisson,rho\n1,15,0.25,1.2\n")
        with pytest.raises(MalformedFileError) as info:
            load_catalog(path)
        assert info.value.line == 1

    def test_unparsable_row_reports_line(self, tmp_path):
        path = write_csv(tmp_path, "id,E,nu,rho\n1,15,0.25,1.2\n2,abc,0.25,1.2\n")
        with pytest.raises(MalformedFileError) as info:
            load_catalog(path)
        assert info.value.line == 3

    def test_out_of_range_rows_are_listed(self, tmp_path):
        path = write_csv(tmp_path, "id,E,nu,rho\n1,15,0.25,1.2\n2,15,0.5,1.2\n3,0,0.2,1.0\n")
        with pytest.raises(CatalogValidationError) as info:
            load_catalog(path)
        assert info.value.offending_ids == [2, 3]
        assert info.value.exit_code == 2

    def test_header_only(self, tmp_path):
        with pytest.raises(EmptyCatalogError):
            load_catalog(write_csv(tmp_path, "id,E,nu,rho\n"))

    def test_duplicate_ids(self, tmp_path):
        path = write_csv(tmp_path, "id,E,nu,rho\n1,15,0.25,1.2\n1,20,0.25,1.2\n")
        with pytest.raises(CatalogValidationError):
            load_catalog(path)

    def test_record_limit(self, tmp_path):
        rows = "".join(f"{i},{10 + i},0.25,1.0\n" for i in range(1, 6))
        with pytest.raises(InputValidationError):
            load_catalog(write_csv(tmp_path, "id,E,nu,rho\n" + rows), max_records=4)

    def test_save_then_load(self, tmp_path, small_catalog):
        loaded = load_catalog(save_catalog(small_catalog, tmp_path / "out.csv"))
        assert np.array_equal(loaded.properties, small_catalog.properties)


# =============================================================================
# Synthetic generation and sampling
# =============================================================================

class TestSyntheticCatalog:
    def test_default_structure(self):
        catalog = generate_synthetic_catalog(seed=0)
        assert len(catalog) == 500
        assert len(catalog.nonempty_chunks) == 168

    def test_deterministic(self):
        first = generate_synthetic_catalog(seed=3, n=40, nonempty_chunks=20)
        second = generate_synthetic_catalog(seed=3, n=40, nonempty_chunks=20)
        assert np.array_equal(first.properties, second.properties)

    def test_too_small(self):
        with pytest.raises(InputValidationError):
            generate_synthetic_catalog(seed=0, n=1)


def test_sample_material_is_uniform_over_chunks():
    # One material in chunk (0, 5, 1), nine in chunk (3, 5, 1)
    records = [MaterialRecord(id=1, E=10.0, nu=0.25, rho=1.5)]
    records += [MaterialRecord(id=i, E=160.0 + i, nu=0.25, rho=1.5) for i in range(2, 11)]
    catalog = Catalog(records)
    rng = np.random.default_rng(0)
    draws = [sample_material(catalog, rng).id for _ in range(4000)]
    share = draws.count(1) / len(draws)
    assert abs(share - 0.5) < 0.03


class TestNearest:
    def test_exact_member(self, small_catalog):
        record, distance = nearest_material(small_catalog, small_catalog.normalized[2])
        assert record.id == 3
        assert distance == pytest.approx(0.0)

    def test_tie_goes_to_lowest_id(self):
        catalog = Catalog([
            MaterialRecord(id=5, E=200.0, nu=0.3, rho=2.0),
            MaterialRecord(id=9, E=100.0, nu=0.3, rho=2.0),
        ])
        record, _ = nearest_material(catalog, normalize([150.0, 0.3, 2.0]))
        assert record.id == 5

    def test_vectorized_lookup(self, small_catalog):
        points = np.broadcast_to(small_catalog.normalized[1] + 0.01, (3, 3, 3))
        vectors, distances = nearest_materials(small_catalog, points)
        assert vectors.shape == (3, 3, 3)
        assert np.allclose(vectors, small_catalog.normalized[1])
        assert np.allclose(distances, np.sqrt(3) * 0.01)
