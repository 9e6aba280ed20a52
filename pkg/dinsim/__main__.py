from dinsim.cli import app

app(prog_name="dinsim")
