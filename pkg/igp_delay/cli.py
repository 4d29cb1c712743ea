import os
import sys
import math
import time
import logging
import argparse
from datetime import timedelta
from typing import Any, Dict, List, Optional

import numpy as np

from .branch import SimulationSettings, amplitude_growth_check, summarize, sweep
from .critical_delay import hopf_reports
from .dde_sim import EndState, classify_endstate, integrate, measure_oscillation
from .model import community_module, equilibria, equilibrium, residual
from .output import Output, dumps
from .presets import PRESETS, RunConfig, resolve_config
from .spectrum_oracle import find_crossing, track
from .stability import char_poly, hopf_factor, static_roots, tau0_stability
from .utils.exceptions import (
    IGPDelayError,
    InvalidInputError,
    InvalidParameterError,
    InvalidStepError,
    NoCrossingError,
    NotApplicableError,
    UndefinedEquilibriumError,
)

USAGE_ERRORS = (InvalidParameterError, InvalidInputError, InvalidStepError)


def tau_grid(tau_min: float, tau_max: float, tau_step: float) -> np.ndarray:
    """Inclusive uniform grid tau_min, tau_min + step, ..., <= tau_max."""
    if not (tau_step > 0 and 0 <= tau_min <= tau_max):
        raise InvalidInputError(f"Invalid tau grid: min={tau_min}, max={tau_max}, step={tau_step}")
    n = int(math.floor((tau_max - tau_min) / tau_step + 1e-9))
    return np.round(tau_min + tau_step * np.arange(n + 1), 12)


class IGPDelayCLI:
    """Command-line interface for the delayed intraguild-predation toolkit."""

    def __init__(self):
        self.logger = logging.getLogger('igp_delay')
        self.logger.setLevel(logging.INFO)

        # Create console handler once per process
        if not self.logger.handlers:
            ch = logging.StreamHandler()
            ch.setLevel(logging.DEBUG)
            formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
            ch.setFormatter(formatter)
            self.logger.addHandler(ch)

    def parse_args(self, args: List[str] = None) -> argparse.Namespace:
        """Parse command line arguments."""
        common = argparse.ArgumentParser(add_help=False)
        source = common.add_mutually_exclusive_group(required=True)
        source.add_argument('--preset', choices=sorted(PRESETS), help='Built-in parameter set')
        source.add_argument('--params', help='JSON parameter file')
        common.add_argument('--allow-zero', action='store_true',
                            help='Accept zero rate constants in the parameter file')
        common.add_argument('--eq', choices=['E0', 'E1', 'E2', 'E3', 'E4'],
                            help='Equilibrium to follow (defaults to the preset or file value)')
        common.add_argument('--out', help='Output file path')
        common.add_argument('--json', action='store_true', help='Print the JSON report to stdout')
        common.add_argument('--verbose', action='store_true', help='Debug logging')

        grid = argparse.ArgumentParser(add_help=False)
        grid.add_argument('--tau-min', type=float, default=1.0, help='Smallest delay of the grid')
        grid.add_argument('--tau-max', type=float, default=2.4, help='Largest delay of the grid')
        grid.add_argument('--tau-step', type=float, default=0.05, help='Grid spacing')

        parser = argparse.ArgumentParser(
            description='Stability and Hopf bifurcation analysis of the delayed intraguild-predation model'
        )
        sub = parser.add_subparsers(dest='command', required=True)

        analyze = sub.add_parser('analyze', parents=[common],
                                 help='Equilibria, tau = 0 stability and Hopf thresholds')
        analyze.add_argument('--tau', type=float, help='Delay recorded with the parameters')
        analyze.add_argument('--k-max', type=int, default=5, help='Number of crossing delays per report')

        simulate = sub.add_parser('simulate', parents=[common], help='Integrate the delayed model')
        simulate.add_argument('--tau', type=float, help='Delay')
        simulate.add_argument('--t-end', type=float, default=1500.0, help='Final time')
        simulate.add_argument('--dt', type=float, help='Step size; must divide tau into at least 20 steps')
        simulate.add_argument('--stride', type=int, default=1, help='Write every stride-th grid point')
        simulate.add_argument('--history', type=float, nargs=3, metavar=('X0', 'Y0', 'Z0'),
                              help='Constant initial history')

        branch = sub.add_parser('branch', parents=[common, grid], help='Sweep the delay and measure amplitudes')
        branch.add_argument('--t-end', type=float, default=1500.0, help='Final time per point')
        branch.add_argument('--t-end-near', type=float, default=3000.0,
                            help='Final time for delays within 5%% of the threshold')
        branch.add_argument('--workers', type=int, default=1, help='Parallel simulation processes')

        spectrum = sub.add_parser('spectrum', parents=[common, grid], help='Track rightmost characteristic roots')
        spectrum.add_argument('--roots', type=int, default=3, help='Roots reported per delay')
        spectrum.add_argument('--factor', action='store_true',
                              help='Use the delay-carrying factor instead of the full cubic')

        return parser.parse_args(args)

    def run(self, args: List[str] = None) -> int:
        """Main entry point for the CLI application."""
        start_time = time.time()
        self.args = self.parse_args(args)
        if self.args.verbose:
            self.logger.setLevel(logging.DEBUG)

        handlers = {
            'analyze': self.cmd_analyze,
            'simulate': self.cmd_simulate,
            'branch': self.cmd_branch,
            'spectrum': self.cmd_spectrum,
        }
        try:
            config = self._resolve(self.args)
            handlers[self.args.command](config)
        except USAGE_ERRORS as e:
            print(f"\nError: {e}", file=sys.stderr)
            return 2
        except IGPDelayError as e:
            print(f"\nError: {e}", file=sys.stderr)
            return 1
        except KeyboardInterrupt:
            print("\nProcess interrupted.", file=sys.stderr)
            return 1

        elapsed = time.time() - start_time
        self.logger.info("Total execution time: %s", timedelta(seconds=elapsed))
        return 0

    def _resolve(self, args: argparse.Namespace) -> RunConfig:
        settings: Dict[str, Any] = {}
        for key in ('tau_min', 'tau_max', 'tau_step', 't_end', 't_end_near', 'dt', 'stride',
                    'workers', 'roots', 'factor', 'k_max'):
            if hasattr(args, key):
                settings[key] = getattr(args, key)
        settings['out'] = self._out_path(args)
        return resolve_config(
            args.command,
            preset=args.preset,
            params_path=args.params,
            tau=getattr(args, 'tau', None),
            history=getattr(args, 'history', None),
            eq=args.eq,
            allow_zero=args.allow_zero,
            settings=settings,
        )

    @staticmethod
    def _out_path(args: argparse.Namespace) -> str:
        if args.out:
            return args.out
        default = {'analyze': 'analysis.json', 'simulate': 'trajectory.csv',
                   'branch': 'branch.csv', 'spectrum': 'spectrum.csv'}[args.command]
        return os.path.join('output', default)

    def _emit(self, config: RunConfig, report: Dict[str, Any], json_name: Optional[str] = None) -> None:
        out = config.settings['out']
        output = Output.for_path(out)
        if json_name is not None:
            output.write_json(json_name, report)
        output.write_config(out, config)
        if self.args.json:
            sys.stdout.write(dumps(report))

    def cmd_analyze(self, config: RunConfig) -> Dict[str, Any]:
        """Equilibria, existence, tau = 0 verdicts and all applicable Hopf reports."""
        params = config.params
        records = []
        for eq in equilibria(params):
            entry = eq.to_dict()
            entry['residual'] = residual(params, eq)
            try:
                entry['tau0'] = tau0_stability(params, eq).to_dict()
                entry['static_roots'] = static_roots(params, eq)
            except (NotApplicableError, UndefinedEquilibriumError) as e:
                entry['tau0'] = {'status': 'not-applicable', 'reason': str(e)}
            records.append(entry)

        report = {
            'params': params.to_dict(),
            'community_module': community_module(params),
            'equilibria': records,
            'hopf': hopf_reports(params, config.settings.get('k_max', 5)),
        }
        self._emit(config, report, os.path.basename(config.settings['out']))

        if not self.args.json:
            print(f"Community module: {report['community_module']}")
            for entry in records:
                coords = entry['coords']
                shown = 'undefined' if coords is None else '(' + ', '.join(f"{c:.4f}" for c in coords) + ')'
                print(f"- {entry['kind']}: {shown} exists={entry['exists']}")
            for kind, hopf in report['hopf'].items():
                if hopf.get('status') == 'not-applicable':
                    print(f"- {kind} threshold: not applicable ({hopf['reason']})")
                else:
                    print(f"- {kind} threshold: tau={hopf['tau_critical']} omega={hopf['omega']}")
        return report

    def cmd_simulate(self, config: RunConfig) -> Dict[str, Any]:
        """Integrate from the configured history and write the trajectory CSV."""
        s = config.settings
        traj = integrate(config.params, config.history, s['t_end'], s['dt'])
        out = s['out']
        Output.for_path(out).write_csv(out, ('t', 'x', 'y', 'z'), traj.to_rows(s['stride']))

        report: Dict[str, Any] = {
            'tau': traj.tau,
            'dt': traj.dt,
            'final_state': traj.final_state.tolist(),
            'clamped': traj.clamped,
        }
        eq = equilibrium(config.params, config.eq_kind)
        if eq.defined:
            state = classify_endstate(traj, eq)
            report['equilibrium'] = eq.to_dict()
            report['classification'] = state.value
            if state != EndState.CONVERGED:
                report['oscillation'] = measure_oscillation(traj).to_dict()
        self._emit(config, report, os.path.splitext(os.path.basename(out))[0] + '.json')

        if not self.args.json:
            x, y, z = report['final_state']
            print(f"Final state at t={traj.t[-1]:g}: ({x:.6f}, {y:.6f}, {z:.6f})")
            if 'classification' in report:
                print(f"Classification relative to {eq.kind.value}: {report['classification']}")
            print(f"Trajectory written to: {out}")
        return report

    def cmd_branch(self, config: RunConfig) -> Dict[str, Any]:
        """Sweep the delay grid, write the diagram CSV and a JSON summary."""
        s = config.settings
        grid = tau_grid(s['tau_min'], s['tau_max'], s['tau_step'])
        settings = SimulationSettings(t_end=s['t_end'], t_end_near=s['t_end_near'], workers=s['workers'])
        diagram = sweep(config.params, config.eq_kind, grid, settings)

        check = None
        if diagram.hopf_tau is not None and grid[0] < diagram.hopf_tau < grid[-1]:
            check = amplitude_growth_check(diagram, tol_osc=settings.tol_osc)
        else:
            self.logger.warning("Grid does not span the Hopf delay %s; growth check skipped", diagram.hopf_tau)

        out = s['out']
        output = Output.for_path(out)
        output.write_csv(out, ('tau', 'eq_stable', 'class', 'amp_x', 'amp_y', 'amp_z', 'period'), diagram.to_rows())
        report = summarize(diagram, check)
        self._emit(config, report, os.path.splitext(os.path.basename(out))[0] + '.json')

        if not self.args.json:
            print(f"Hopf delay: {diagram.hopf_tau}")
            if check is not None:
                print(f"Amplitude growth check: {'pass' if check.passed else 'fail'} ({check.message})")
            print(f"Diagram written to: {out}")
        return report

    def cmd_spectrum(self, config: RunConfig) -> Dict[str, Any]:
        """Track the rightmost roots over the grid and locate the first crossing."""
        s = config.settings
        grid = tau_grid(s['tau_min'], s['tau_max'], s['tau_step'])
        eq = equilibrium(config.params, config.eq_kind)
        qp = hopf_factor(config.params, eq) if s['factor'] else char_poly(config.params, eq)

        roots = track(qp, grid, s['roots'])
        rows = [(r.tau, r.lam.real, r.lam.imag, r.residual) for r in roots]
        out = s['out']
        Output.for_path(out).write_csv(out, ('tau', 're_lambda', 'im_lambda', 'residual'), rows)

        report: Dict[str, Any] = {'eq_kind': eq.kind.value, 'quasi_polynomial': qp.to_dict(), 'crossing': None}
        if len(grid) > 1:
            try:
                tau_star, omega_star = find_crossing(qp, float(grid[0]), float(grid[-1]))
                report['crossing'] = {'tau': tau_star, 'omega': omega_star}
            except NoCrossingError as e:
                self.logger.info("No crossing on the grid: %s", e)
        self._emit(config, report, os.path.splitext(os.path.basename(out))[0] + '.json')

        if not self.args.json:
            crossing = report['crossing']
            if crossing:
                print(f"Rightmost root crosses at tau={crossing['tau']:.10f}, omega={crossing['omega']:.10f}")
            else:
                print("Rightmost root does not cross the imaginary axis on the grid")
            print(f"Roots written to: {out}")
        return report


def main():
    """Entry point for console script."""
    cli = IGPDelayCLI()
    sys.exit(cli.run())


if __name__ == '__main__':
    main()
