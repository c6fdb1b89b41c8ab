public static class xReshapeUtil
{
    public static int[,] xReshape(int[] y, int[] x)
    {
        var r = new int[y[0], y[1]];
        int k = 0;
        for (int i = 0; i < y[0]; i++)
            for (int j = 0; j < y[1]; j++)
            {
                r[i, j] = x[k % x.Length];
                k++;
            }
        return r;
    }
}
