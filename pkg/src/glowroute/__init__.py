"""Thermal-aware global routing of WDM optical waveguides."""

__version__ = "0.1.0"

from .flow import FlowResult, route_design
from .ingest import Config, ParseError, parse_config, parse_netlist, parse_thermal
from .oil import DeviceModels, critical_length

__all__ = ["Config", "DeviceModels", "FlowResult", "ParseError", "critical_length",
           "parse_config", "parse_netlist", "parse_thermal", "route_design", "__version__"]
