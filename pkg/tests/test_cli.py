import pandas as pd
import pytest

from fdmderham.cli import (EXIT_DATA, EXIT_INVALID, EXIT_NOT_CONVERGED,
                           EXIT_OK, main)

from testcommon import getdatadir


def test_basis(capsys):
    assert main(['basis', '-p', '2']) == EXIT_OK
    out = capsys.readouterr().out
    assert '# Lambda 2 1' in out


def test_basis_invalid_degree():
    assert main(['basis', '-p', '0']) == EXIT_INVALID


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(['plot'])
    assert exc.value.code == 2


def test_mesh_generate_and_check(tmp_path, capsys):
    path = str(tmp_path / 'box.hex')
    assert main(['mesh', '--nx', '1', '--ny', '1', '--nz', '1', '--refine', '1',
                 '--output', path]) == EXIT_OK
    assert main(['mesh', '--check', path]) == EXIT_OK
    out = capsys.readouterr().out
    assert 'cells 8' in out
    assert 'kind cartesian' in out


def test_mesh_errors(tmp_path):
    assert main(['mesh', '--check', getdatadir('bad_coordinate.hex')]) == EXIT_DATA
    assert main(['mesh', '--check', getdatadir('inverted.hex')]) == EXIT_DATA
    assert main(['mesh', '--check', str(tmp_path / 'missing.hex')]) == EXIT_INVALID
    assert main(['mesh']) == EXIT_INVALID


def test_riesz_outputs(tmp_path):
    csv = tmp_path / 'riesz.csv'
    report = tmp_path / 'riesz.md'
    assert main(['riesz', '-k', '0', '-p', '1', '--output', str(csv),
                 '--markdown', str(report)]) == EXIT_OK
    assert csv.read_text().startswith('# fdmderham-table v1 riesz')
    frame = pd.read_csv(csv, comment='#')
    assert frame.loc[0, 'iterations'] == 1
    text = report.read_text()
    assert text.startswith('# H(grad) SC-PH')
    assert '## CG iteration counts' in text


def test_riesz_stdout(capsys):
    assert main(['riesz', '-k', '1', '-p', '1', '--mesh-file',
                 getdatadir('unit_cube.hex'), '--dirichlet', 'none',
                 '--beta', '1']) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith('# fdmderham-table v1 riesz')


def test_riesz_not_converged(tmp_path):
    csv = tmp_path / 'riesz.csv'
    assert main(['riesz', '-k', '0', '-p', '2', '--maxit', '1',
                 '--output', str(csv)]) == EXIT_NOT_CONVERGED
    frame = pd.read_csv(csv, comment='#')
    assert not frame.loc[0, 'converged']


@pytest.mark.parametrize('argv', [
    ['riesz', '--set', 'k=7'],
    ['riesz', '--config', getdatadir('unknown_key.cfg')],
    ['riesz', '-k', '0', '-p', '2', '--nx', '1', '--ny', '1', '--nz', '1',
     '--decomposition', 'pafw'],
    ['riesz', '--alpha', 'jump:1:2'],
    ['sweep', '-k', '0'],
])
def test_invalid_configuration(argv):
    assert main(argv) == EXIT_INVALID


def test_riesz_bad_mesh_file():
    assert main(['riesz', '-p', '1', '--mesh-file',
                 getdatadir('bad_coordinate.hex')]) == EXIT_DATA


def test_hodge_defaults(capsys):
    assert main(['hodge', '-p', '2', '--nx', '1', '--ny', '1', '--nz', '1']) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith('# fdmderham-table v1 hodge')


def test_complexity(tmp_path):
    csv = tmp_path / 'complexity.csv'
    assert main(['complexity', '-p', '2', '--output', str(csv)]) == EXIT_OK
    frame = pd.read_csv(csv, comment='#')
    assert list(frame['p']) == [2]
    assert frame.loc[0, 'nnz GLL'] > 0


def test_spy(tmp_path, capsys):
    outdir = tmp_path / 'spy'
    assert main(['spy', '-k', '0', '-p', '2', '--outdir', str(outdir)]) == EXIT_OK
    assert len(capsys.readouterr().out.split()) == 5
