"""Test problems, perturbation sampling, brute-force oracle and trial campaigns."""

from .campaign import BoundReport, ReportRow, TrialCampaign, run_campaign
from .oracle import OracleRecord, oracle_exact
from .problems import ProblemSpec, TripleProblem, gen_brake, gen_jordan, gen_wiresaw
from .report import emit_report, read_report
from .sampling import sample_perturbation
