"""Domain models for the reserve-risk engine."""

from app.models.triangle import Triangle, NextDiagonal, ExtendedTriangle
from app.models.estimates import Gamma, DevFactorEstimates, Reserves
from app.models.world import TrueParams, ResidueSet
from app.models.risk import MethodTag, InversionDraw, ScrResult
from app.models.backtest import BacktestConfig, BacktestReport, SolvencyEstimate
from app.models.fiducial import FiducialSetup

# Export all models for clean imports
__all__ = [
    'Triangle',
    'NextDiagonal',
    'ExtendedTriangle',
    'Gamma',
    'DevFactorEstimates',
    'Reserves',
    'TrueParams',
    'ResidueSet',
    'MethodTag',
    'InversionDraw',
    'ScrResult',
    'BacktestConfig',
    'BacktestReport',
    'SolvencyEstimate',
    'FiducialSetup',
]
