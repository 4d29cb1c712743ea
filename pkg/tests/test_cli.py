import csv
import json
import math

import pytest

from igp_delay.cli import IGPDelayCLI, tau_grid
from igp_delay.presets import PRESETS, resolve_config
from igp_delay.utils.exceptions import InvalidInputError


def run(*argv) -> int:
    return IGPDelayCLI().run(list(argv))


def read_json(path):
    with open(path, encoding='utf-8') as f:
        return json.load(f)


class TestConfig:
    def test_presets_encode_examples(self):
        assert PRESETS['example2'].params.b1 == 0.5
        assert PRESETS['example3'].params.b1 == 1.0
        assert PRESETS['example3'].params.c1 == 0.42
        assert tuple(PRESETS['example3'].history) == (0.78, 0.58, 0.06)

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / 'params.json'
        path.write_text(json.dumps(dict(PRESETS['example1'].params.to_dict(), tau=0.5, eq='E1')))
        config = resolve_config('simulate', params_path=str(path), tau=1.2)
        assert config.params.tau == 1.2
        assert config.eq_kind.value == 'E1'

    def test_needs_exactly_one_source(self):
        with pytest.raises(InvalidInputError):
            resolve_config('analyze')
        with pytest.raises(InvalidInputError):
            resolve_config('analyze', preset='example9')

    def test_tau_grid_is_inclusive(self):
        grid = tau_grid(1.0, 2.4, 0.05)
        assert len(grid) == 29
        assert grid[-1] == pytest.approx(2.4)
        with pytest.raises(InvalidInputError):
            tau_grid(2.0, 1.0, 0.1)


class TestAnalyze:
    @pytest.mark.parametrize('preset, kind, expected', [
        ('example1', 'E1', math.pi / 2),
        ('example2', 'E2', 1.6573),
        ('example3', 'E4', 1.7438),
    ])
    def test_thresholds(self, tmp_path, preset, kind, expected):
        out = tmp_path / 'analysis.json'
        assert run('analyze', '--preset', preset, '--out', str(out)) == 0
        report = read_json(out)
        assert report['hopf'][kind]['tau_critical'] == pytest.approx(expected, abs=5e-4)
        assert (tmp_path / 'analysis.json.config.json').exists()

    def test_interior_equilibrium_and_not_applicable_entries(self, tmp_path):
        out = tmp_path / 'analysis.json'
        assert run('analyze', '--preset', 'example3', '--out', str(out)) == 0
        report = read_json(out)
        e4 = report['equilibria'][4]
        assert e4['coords'] == pytest.approx([0.7778, 0.5778, 0.0556], abs=5e-4)
        assert e4['tau0']['stable_at_tau0']
        assert report['hopf']['E1']['status'] == 'not-applicable'

    def test_json_to_stdout(self, tmp_path, capsys):
        assert run('analyze', '--preset', 'example1', '--out', str(tmp_path / 'a.json'), '--json') == 0
        report = json.loads(capsys.readouterr().out)
        assert report['community_module'] == 'intraguild-predation'

    def test_malformed_params_file(self, tmp_path):
        path = tmp_path / 'bad.json'
        path.write_text('{"a0": 1.0,')
        assert run('analyze', '--params', str(path), '--out', str(tmp_path / 'a.json')) == 2

    def test_missing_source_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run('analyze')
        assert exc.value.code == 2


class TestSimulate:
    def test_writes_trajectory(self, tmp_path):
        out = tmp_path / 'traj.csv'
        assert run('simulate', '--preset', 'example1', '--tau', '1.2', '--t-end', '200', '--stride', '10',
                   '--out', str(out)) == 0
        with open(out, newline='') as f:
            rows = list(csv.reader(f))
        assert rows[0] == ['t', 'x', 'y', 'z']
        x, y, z = (float(v) for v in rows[-1][1:])
        assert abs(x - 2.0) < 1e-3 and y < 1e-3 and z < 1e-3
        summary = read_json(tmp_path / 'traj.json')
        assert summary['classification'] == 'converged'
        config = read_json(tmp_path / 'traj.csv.config.json')
        assert config['params']['tau'] == 1.2
        assert config['settings']['stride'] == 10

    def test_output_is_deterministic(self, tmp_path):
        first, second = tmp_path / 'a.csv', tmp_path / 'b.csv'
        for out in (first, second):
            assert run('simulate', '--preset', 'example3', '--tau', '1.0', '--t-end', '20', '--out', str(out)) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_bad_step_is_usage_error(self, tmp_path):
        assert run('simulate', '--preset', 'example1', '--tau', '1.0', '--dt', '0.1',
                   '--out', str(tmp_path / 't.csv')) == 2

    @pytest.mark.slow
    @pytest.mark.parametrize('preset, tau, t_end, expected', [
        ('example2', '2.0', '1500', 'oscillating'),
        ('example3', '0', '3000', 'converged'),
    ])
    def test_reference_regimes(self, tmp_path, preset, tau, t_end, expected):
        out = tmp_path / 'traj.csv'
        assert run('simulate', '--preset', preset, '--tau', tau, '--t-end', t_end, '--stride', '100',
                   '--out', str(out)) == 0
        assert read_json(tmp_path / 'traj.json')['classification'] == expected


class TestSpectrumAndBranch:
    def test_spectrum_crossing(self, tmp_path):
        out = tmp_path / 'spectrum.csv'
        assert run('spectrum', '--preset', 'example1', '--tau-min', '1.4', '--tau-max', '1.7', '--tau-step', '0.1',
                   '--out', str(out)) == 0
        report = read_json(tmp_path / 'spectrum.json')
        assert report['crossing']['tau'] == pytest.approx(math.pi / 2, abs=1e-6)
        with open(out, newline='') as f:
            reader = csv.DictReader(f)
            rows = list(reader)
        assert reader.fieldnames == ['tau', 're_lambda', 'im_lambda', 'residual']
        assert sorted({float(r['tau']) for r in rows}) == pytest.approx([1.4, 1.5, 1.6, 1.7])

    def test_branch_below_threshold(self, tmp_path):
        out = tmp_path / 'branch.csv'
        assert run('branch', '--preset', 'example1', '--tau-min', '1.0', '--tau-max', '1.2', '--tau-step', '0.1',
                   '--t-end', '200', '--t-end-near', '200', '--out', str(out)) == 0
        summary = read_json(tmp_path / 'branch.json')
        assert summary['growth_check'] is None
        assert all(p['peak_to_peak'] == [0.0, 0.0, 0.0] for p in summary['points'])
