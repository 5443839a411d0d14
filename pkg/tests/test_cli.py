"""End-to-end runs of the command-line interface."""
import pytest

from chartcov import __version__
from chartcov.cli import main


def _run(capsys, *argv):
    status = main([str(arg) for arg in argv])
    captured = capsys.readouterr()
    return status, captured.out, captured.err


@pytest.fixture
def traces_file(tmp_path, model_path):
    path = tmp_path / 'traces.jsonl'
    assert main(['simulate', str(model_path), '--n', '200', '--seed', '7', '--out', str(path)]) == 0
    return path


class TestModelCommands:
    def test_validate_reference(self, capsys, model_path):
        status, out, err = _run(capsys, 'validate', model_path)
        assert status == 0
        assert err == ''

    def test_validate_broken(self, capsys, tmp_path):
        path = tmp_path / 'bad.scd'
        path.write_text("statechart L { initial Red state Red { on GO -> Grn } state Green }")
        status, out, err = _run(capsys, 'validate', path)
        assert status == 2
        assert f"{path}:1:" in err
        assert 'error[unknown-target]' in err
        assert out == ''

    def test_enumerate(self, capsys, model_path):
        status, out, _ = _run(capsys, 'enumerate', model_path)
        assert status == 0
        lines = out.splitlines()
        assert lines[0] == 'total=840'
        assert 'chart=rsu_comm states=7' in lines

    def test_enumerate_reduced(self, capsys, model_path):
        status, out, _ = _run(capsys, 'enumerate', model_path, '--reduced')
        assert status == 0
        assert out.strip() == 'reduced=64 feasible=48'

    def test_enumerate_list(self, capsys, model_path):
        _, out, _ = _run(capsys, 'enumerate', model_path, '--list')
        assert 'Red,Undetected,Idle,Approaching' in out.splitlines()
        assert len(out.splitlines()) == 1 + 4 + 840

    def test_missing_model_is_io_error(self, capsys, tmp_path):
        status, _, err = _run(capsys, 'enumerate', tmp_path / 'nope.scd')
        assert status == 3
        assert 'chartcov: error:' in err


class TestSimulate:
    def test_byte_identical_reruns(self, tmp_path, model_path):
        first, second = tmp_path / 'a.jsonl', tmp_path / 'b.jsonl'
        for path in (first, second):
            assert main(['simulate', str(model_path), '--n', '3', '--seed', '7', '--out', str(path)]) == 0
        assert first.read_bytes() == second.read_bytes()
        assert len(first.read_text().splitlines()) == 3

    def test_seed_is_required(self, capsys, model_path):
        status, _, err = _run(capsys, 'simulate', model_path, '--n', '3')
        assert status == 2
        assert '--seed' in err

    def test_bad_probability(self, capsys, model_path):
        status, _, err = _run(capsys, 'simulate', model_path, '--n', '3', '--seed', '1', '--p-tx', '2')
        assert status == 2
        assert 'p_tx' in err


class TestCoverage:
    def test_reports(self, capsys, tmp_path, traces_file):
        csv_path, svg_path = tmp_path / 'cov.csv', tmp_path / 'cov.svg'
        status, out, _ = _run(capsys, 'coverage', traces_file, '--csv', csv_path, '--svg', svg_path)
        assert status == 0
        assert out.splitlines()[0] == 'total=200'
        assert out.splitlines()[1].endswith('/48')
        assert len(csv_path.read_text().splitlines()) == 65
        assert svg_path.read_text().startswith('<svg')

    def test_fail_on_gap(self, capsys, traces_file):
        status, out, _ = _run(capsys, 'coverage', traces_file, '--fail-on-gap')
        assert status == 1
        assert 'under=3-' in out

    def test_schema_error(self, capsys, tmp_path):
        path = tmp_path / 'broken.jsonl'
        path.write_text('{"id": 0}\n')
        status, _, err = _run(capsys, 'coverage', path)
        assert status == 2
        assert 'line 1' in err


class TestCcp:
    def test_single_type(self, capsys):
        status, out, _ = _run(capsys, 'ccp', '--types', 1, '--trials', 10, '--seed', 0)
        assert status == 0
        assert 'mean_draws=1.0000' in out.splitlines()
        assert 'draws_for[0.95]=1' in out.splitlines()

    def test_weights_file(self, capsys, tmp_path):
        path = tmp_path / 'w.csv'
        path.write_text('type,weight\na,0.9\nb,0.1\n')
        status, out, _ = _run(capsys, 'ccp', '--weights', path, '--trials', 2000, '--seed', 3)
        assert status == 0
        assert 'types=2' in out.splitlines()
        assert 'analytic_mean=10.5556' in out.splitlines()

    def test_never_completes(self, capsys, tmp_path):
        path = tmp_path / 'w.csv'
        path.write_text('a,0.5\nb,0\n')
        status, _, err = _run(capsys, 'ccp', '--weights', path, '--trials', 10, '--seed', 3)
        assert status == 1
        assert 'never' in err

    def test_from_traces(self, capsys, traces_file):
        status, out, _ = _run(capsys, 'ccp', '--traces', traces_file, '--trials', 100, '--seed', 1)
        assert status == 0
        assert any(line.startswith('caveat=') for line in out.splitlines())

    def test_sources_are_exclusive(self, capsys, tmp_path):
        status, _, _ = _run(capsys, 'ccp', '--types', 4, '--weights', tmp_path / 'w.csv',
                            '--trials', 10, '--seed', 0)
        assert status == 2

    def test_deterministic(self, capsys):
        _, first, _ = _run(capsys, 'ccp', '--types', 16, '--trials', 200, '--seed', 5)
        _, second, _ = _run(capsys, 'ccp', '--types', 16, '--trials', 200, '--seed', 5)
        assert first == second


class TestTestCommands:
    def test_generate_and_run(self, capsys, tmp_path, model_path):
        tests = tmp_path / 'tests.jsonl'
        assert main(['test', 'gen-profile1', str(model_path), '--out', str(tests)]) == 0
        assert len(tests.read_text().splitlines()) == 6
        status, out, _ = _run(capsys, 'test', 'run', model_path, tests)
        assert status == 0
        assert out.splitlines() == ['PASS T1', 'PASS T2', 'PASS T3', 'PASS T4', 'PASS T4.1', 'PASS T4.2']

    def test_failing_test(self, capsys, tmp_path, model_path):
        tests = tmp_path / 'tests.jsonl'
        tests.write_text(
            '{"name":"stop","description":"","when":[{"name":"DETECT","payload":{}},'
            '{"name":"LOCATE","payload":{}},{"name":"ZONE_ENTER","payload":{"txok":false}},'
            '{"name":"TIMEOUT","payload":{}}],"expect":{"vehicle":"Stop"},"match":{}}\n')
        status, out, _ = _run(capsys, 'test', 'run', model_path, tests)
        assert status == 1
        assert out.startswith('FAIL stop: vehicle expected Stop got PossibleVRUPresent')

    def test_unknown_event(self, capsys, tmp_path, model_path):
        tests = tmp_path / 'tests.jsonl'
        tests.write_text('{"name":"x","description":"","when":[{"name":"WARP","payload":{}}],'
                         '"expect":{},"match":{}}\n')
        status, _, err = _run(capsys, 'test', 'run', model_path, tests)
        assert status == 2
        assert 'WARP' in err

    def test_text_payload_is_a_schema_error(self, capsys, tmp_path, model_path):
        tests = tmp_path / 'tests.jsonl'
        tests.write_text('{"name":"x","description":"","when":[{"name":"ZONE_ENTER","payload":{"txok":"yes"}}],'
                         '"expect":{},"match":{}}\n')
        status, _, err = _run(capsys, 'test', 'run', model_path, tests)
        assert status == 2
        assert 'line 1' in err

    def test_assign(self, capsys, tmp_path, model_path, traces_file):
        tests = tmp_path / 'tests.jsonl'
        main(['test', 'gen-profile1', str(model_path), '--out', str(tests)])
        status, out, _ = _run(capsys, 'test', 'assign', tests, traces_file, '--k', 1000)
        assert status == 0
        lines = out.splitlines()
        assert lines[:6] == [line for line in lines if line.split('=')[0] in
                             ('T1', 'T2', 'T3', 'T4', 'T4.1', 'T4.2')]
        assert 'multiple=0' in lines
        assert sum(1 for line in lines if line.startswith('under=')) == 6


class TestCatalog:
    def test_ingest_and_coverage(self, capsys, tmp_path, traces_file):
        db = tmp_path / 'catalog.db'
        status, out, _ = _run(capsys, 'catalog', 'ingest', db, traces_file, '--campaign', 'night', '--seed', 7)
        assert status == 0
        assert out.strip() == 'campaign=1 inserted=200 skipped=0'

        status, out, _ = _run(capsys, 'catalog', 'ingest', db, traces_file, '--campaign', 'night')
        assert out.strip() == 'campaign=1 inserted=0 skipped=200'

        status, out, _ = _run(capsys, 'catalog', 'coverage', db, '--k', 1)
        assert status == 0
        assert out.splitlines()[0] == 'total=200'

        jaywalkers = sum(1 for line in traces_file.read_text().splitlines() if '"jaywalker":true' in line)
        _, out, _ = _run(capsys, 'catalog', 'coverage', db, '--jaywalkers')
        assert out.splitlines()[0] == f'total={jaywalkers}'
        _, out, _ = _run(capsys, 'catalog', 'coverage', db, '--no-jaywalkers')
        assert out.splitlines()[0] == f'total={200 - jaywalkers}'

        _, out, _ = _run(capsys, 'catalog', 'list', db)
        assert out.strip() == 'campaign=1 name=night seed=7 scenarios=200'

        csv_path = tmp_path / 'codes.csv'
        _run(capsys, 'catalog', 'codes', db, '--campaign', 1, '--out', csv_path)
        rows = csv_path.read_text().splitlines()
        assert rows[0] == 'scenario,code'
        assert len(rows) == 201


def test_version(capsys):
    status, out, _ = _run(capsys, '--version')
    assert status == 0
    assert __version__ in out


def test_command_required(capsys):
    status, _, _ = _run(capsys)
    assert status == 2
