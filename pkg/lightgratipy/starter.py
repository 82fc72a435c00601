import os


# Version
# =======
__version__ = "0.1.0"


# Git Hash
# ========
try:
    import git

    repo = git.Repo(search_parent_directories=True)
    __git_hash__ = repo.head.object.hexsha
except Exception:
    __git_hash__ = "Undefined"
    print("... [lightgrat] no git hash can be obtained")

# Package Path
# ============
__package_path__ = os.path.dirname(__file__)
