"""Google matrix analysis of the multiproduct world trade network."""
from .balance import (BalanceReport, SensitivityReport, analyze, balance_report,
                      balance_sensitivity, country_balance, node_balance, product_balance)
from .google import GoogleMatrix, assemble_google, build_personalization, build_stochastic, google_matrices
from .ingest import (CountryRegistry, MoneyTensor, ProductRegistry, TradeRecord,
                     build_money_tensor, load_countries, load_products, load_tensor, parse_records)
from .metrics import kendall_distance
from .netreduce import diff_networks, top_k_network
from .ranks import RankIndex, RankVector, import_export_rank, pagerank, sort_index, two_d_rank
from .regomax import ReducedMatrix, reduce, reduced_for_product

__version__ = "0.1.0"
