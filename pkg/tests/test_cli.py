import csv
import json

import pytest

from modules.cli import run
from modules.constants import (
    EXIT_CONFIG,
    EXIT_GRID,
    EXIT_OK,
    EXIT_OUTPUT,
    EXIT_PARAMETER,
    EXIT_UNKNOWN_COMMAND,
    EXIT_USAGE,
)


def _rows(path):
    with open(path, newline='') as f:
        return list(csv.DictReader(f))


@pytest.fixture
def grid_csv(tmp_path):
    path = str(tmp_path / 'grid.csv')
    assert run(['synth-grid', '--seed', '7', '--out', path]) == EXIT_OK
    return path


def test_synth_grid_is_byte_identical(tmp_path, grid_csv):
    again = str(tmp_path / 'again.csv')
    assert run(['synth-grid', '--seed', '7', '--out', again]) == EXIT_OK
    with open(grid_csv, 'rb') as a, open(again, 'rb') as b:
        assert a.read() == b.read()


def test_synth_grid_writes_manifest(grid_csv):
    with open(grid_csv + '.manifest.json') as f:
        manifest = json.load(f)
    assert manifest['command'] == 'synth-grid'
    assert manifest['seed'] == 7
    assert manifest['output_paths'] == [grid_csv]
    assert manifest['created_at']


def test_manifest_records_config_digest(tmp_path):
    cfg = tmp_path / 'scene.cfg'
    cfg.write_text('seed=5\n')
    out = str(tmp_path / 'g.csv')
    assert run(['synth-grid', '--config', str(cfg), '--out', out]) == EXIT_OK
    with open(out + '.manifest.json') as f:
        manifest = json.load(f)
    assert manifest['seed'] == 5
    assert len(manifest['config_sha256']) == 64


def test_import_grid_normalizes(tmp_path, grid_csv):
    out = str(tmp_path / 'imported.csv')
    assert run(['import-grid', '--grid', grid_csv, '--out', out]) == EXIT_OK
    with open(grid_csv) as a, open(out) as b:
        assert a.read() == b.read()


def test_backoff_map_json(tmp_path, grid_csv):
    out = str(tmp_path / 'delta.json')
    assert run(['backoff-map', '--grid', grid_csv, '--kappa', '1', '--json', '--out', out]) == EXIT_OK
    with open(out) as f:
        records = json.load(f)
    assert len(records) == 102
    assert set(records[0]) == {'x_m', 'y_m', 'delta_db'}
    assert all(0.0 < r['delta_db'] <= 10.0 for r in records)


def test_outage_writes_one_series_per_kappa(tmp_path, grid_csv):
    out = str(tmp_path / 'outage.csv')
    code = run(['outage', '--grid', grid_csv, '--kappa', '0,1', '--trials', '1000', '--seed', '3', '--out', out])
    assert code == EXIT_OK
    rows = _rows(out)
    assert len(rows) == 8
    assert {r['kappa'] for r in rows} == {'0.0000', '1.0000'}
    by_kappa = {}
    for r in rows:
        by_kappa.setdefault(r['kappa'], []).append(float(r['p_out']))
    assert all(b <= a for a, b in zip(by_kappa['0.0000'], by_kappa['1.0000']))


def test_lidar_coverage_heights(tmp_path):
    out = str(tmp_path / 'cov.csv')
    assert run(['lidar-coverage', '--heights', '0.9,0.6,0.3', '--width', '0.3', '--out', out]) == EXIT_OK
    coverage = [float(r['coverage']) for r in _rows(out)]
    assert len(coverage) == 3
    assert coverage[0] >= coverage[1] >= coverage[2]


def test_lidar_coverage_default_sizes_and_cells(tmp_path):
    out = str(tmp_path / 'cov.csv')
    cells = str(tmp_path / 'cells.csv')
    assert run(['lidar-coverage', '--out', out, '--cells-out', cells]) == EXIT_OK
    coverage = [float(r['coverage']) for r in _rows(out)]
    assert coverage[0] > coverage[1] > coverage[2]
    flags = [r['detectable'] for r in _rows(cells)]
    assert len(flags) == 102 and set(flags) <= {'true', 'false'}


def test_ccdf_from_samples(tmp_path):
    samples = tmp_path / 'samples.csv'
    samples.write_text('rss_db\n1\n2\n3\n4\n')
    out = str(tmp_path / 'ccdf.csv')
    assert run(['ccdf', '--samples', str(samples), '--out', out]) == EXIT_OK
    rows = _rows(out)
    assert len(rows) == 81
    assert float(rows[0]['ccdf']) == 1.0 and float(rows[-1]['ccdf']) == 0.0


def test_materials_command(tmp_path):
    out = str(tmp_path / 'materials.csv')
    assert run(['materials', '--seed', '2', '--out', out]) == EXIT_OK
    rows = _rows(out)
    assert {r['material'] for r in rows} == {'Silver', 'Copper', 'SilverCoatedMirror', 'Foam'}


@pytest.mark.parametrize('command, extra', [
    ('outage', ['--trials', '300', '--kappa', '0,0.5']),
    ('schedule', ['--instances', '400', '--k', '1,2']),
])
def test_thread_count_does_not_change_output(tmp_path, grid_csv, command, extra):
    outputs = []
    for threads in ('1', '8', '1'):
        out = str(tmp_path / f'{command}-{len(outputs)}.csv')
        code = run([command, '--grid', grid_csv, '--seed', '11', '--threads', threads, '--out', out] + extra)
        assert code == EXIT_OK
        with open(out, 'rb') as f:
            outputs.append(f.read())
    assert outputs[0] == outputs[1] == outputs[2]


def test_lidar_thread_count_does_not_change_output(tmp_path):
    outputs = []
    for threads in ('1', '8'):
        out = str(tmp_path / f'cov-{threads}.csv')
        assert run(['lidar-coverage', '--threads', threads, '--out', out]) == EXIT_OK
        with open(out, 'rb') as f:
            outputs.append(f.read())
    assert outputs[0] == outputs[1]


def test_unknown_subcommand(tmp_path, capsys):
    assert run(['frobnicate', '--out', str(tmp_path / 'x')]) == EXIT_UNKNOWN_COMMAND
    assert capsys.readouterr().err.startswith('error:')


def test_missing_required_flag():
    assert run(['synth-grid']) == EXIT_USAGE


def test_bad_config(tmp_path):
    cfg = tmp_path / 'bad.cfg'
    cfg.write_text('nonsense=1\n')
    assert run(['synth-grid', '--config', str(cfg), '--out', str(tmp_path / 'g.csv')]) == EXIT_CONFIG


def test_missing_grid_file(tmp_path):
    assert run(['backoff-map', '--grid', str(tmp_path / 'absent.csv'), '--out', str(tmp_path / 'd.csv')]) == EXIT_GRID


def test_bad_parameter(tmp_path, grid_csv):
    out = str(tmp_path / 'o.csv')
    assert run(['outage', '--grid', grid_csv, '--trials', '0', '--out', out]) == EXIT_PARAMETER


def test_unwritable_output(tmp_path):
    out = str(tmp_path / 'missing-dir' / 'g.csv')
    assert run(['synth-grid', '--out', out]) == EXIT_OUTPUT


def test_ccdf_rejects_non_finite_sample(tmp_path, capsys):
    samples = tmp_path / 'samples.csv'
    samples.write_text('rss_db\n1\nnan\n3\n')
    out = tmp_path / 'ccdf.csv'
    assert run(['ccdf', '--samples', str(samples), '--out', str(out)]) == EXIT_GRID
    assert f'{samples}:3' in capsys.readouterr().err
    assert not out.exists()


def _samples_file(tmp_path):
    path = tmp_path / 'samples.csv'
    path.write_text('rss_db\n-52.5\n-48\n-61.25\n-55\n')
    return str(path)


@pytest.mark.parametrize('command, extra', [
    ('synth-grid', ['--seed', '9']),
    ('import-grid', ['--grid', 'GRID']),
    ('backoff-map', ['--grid', 'GRID', '--kappa', '2']),
    ('ccdf', ['--grid', 'GRID']),
    ('ccdf', ['--samples', 'SAMPLES']),
    ('materials', ['--seed', '4']),
])
def test_repeat_and_thread_count_give_identical_bytes(tmp_path, grid_csv, command, extra):
    inputs = {'GRID': grid_csv, 'SAMPLES': _samples_file(tmp_path)}
    extra = [inputs.get(a, a) for a in extra]
    outputs = []
    for threads in ('1', '8', '1'):
        out = str(tmp_path / f'{command}-{len(outputs)}.out')
        assert run([command, '--threads', threads, '--out', out] + extra) == EXIT_OK
        with open(out, 'rb') as f:
            outputs.append(f.read())
    assert outputs[0] == outputs[1] == outputs[2]


def test_seed_accepts_leading_zeros(tmp_path):
    padded, plain = str(tmp_path / 'padded.csv'), str(tmp_path / 'plain.csv')
    assert run(['synth-grid', '--seed', '007', '--out', padded]) == EXIT_OK
    assert run(['synth-grid', '--seed', '7', '--out', plain]) == EXIT_OK
    with open(padded, 'rb') as a, open(plain, 'rb') as b:
        assert a.read() == b.read()


def test_import_grid_origin_and_shape(tmp_path):
    src = tmp_path / 'partial.csv'
    src.write_text('x_m,y_m,rss_db\n0.0000,0.3000,-50.0000\n0.3000,0.3000,-51.0000\n')
    out = str(tmp_path / 'cells.json')
    code = run(['import-grid', '--grid', str(src), '--cell-size', '0.3', '--origin', '0,0',
                '--shape', '3,2', '--json', '--out', out])
    assert code == EXIT_OK
    with open(out) as f:
        records = json.load(f)
    assert [(r['x_m'], r['y_m']) for r in records] == [(0.0, 0.3), (0.3, 0.3)]
    assert run(['import-grid', '--grid', str(src), '--origin', '0', '--out', out]) == EXIT_USAGE
