from pdfw import Experiment, load_params

params = load_params()

# Make changes to the params if needed
params["algorithm"]["schedule"] = "CubeRoot"
params["experiment"]["horizons"] = [100, 1000, 10000]

experiment1 = Experiment(params)
experiment1.solve()
experiment1.save("run1")
